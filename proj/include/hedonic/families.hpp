#pragma once

#include "hedonic/sum_form.hpp"
#include "hedonic/surplus.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hedonic {

struct FamilyBoxes {
  Box x;
  Box y;
  Box z;

  /// x, y in [-3,3]^n and z in [-6,6]^n.
  static FamilyBoxes defaults(int n);
};

struct Family {
  std::string name;
  PreferencePair pair;
  std::optional<SumFormProblem> sum_form;  // set for sum-form families
};

/// H*(z) = z.Az/2 (A = I by default), so b(x,y) = (x+y).A^{-1}(x+y)/2.
Family quadratic_family(int n, const FamilyBoxes& boxes, std::optional<Matrix> A = std::nullopt);
/// h = -|x-z|^2/2, g = y.z - |y|^2/2: z(x,y) = x + y and b(x,y) = x.y.
Family bilinear_family(int n, const FamilyBoxes& boxes);
/// H*(z) = |z|^2/2 + eps sum z_i^4/4.
Family quartic_family(int n, const FamilyBoxes& boxes, double eps = 1.0);
/// H*(z) = |z|^2/2 + log sum_k exp(a_k.z) with a_k = 0, the unit vectors and
/// (1,-1,1,...)/2.
Family logconvex_family(int n, const FamilyBoxes& boxes);
/// h over x1..xn, z1..zn and g over y1..yn, z1..zn; derivatives by finite differences.
Family custom_family(int n, const FamilyBoxes& boxes, const std::string& h_text,
                     const std::string& g_text);

struct FamilyParams {
  double epsilon = 1.0;
  std::optional<Matrix> A;
  std::string h;
  std::string g;
};

/// Names accepted by make_family.
const std::vector<std::string>& family_names();

/// Throws kInvalidArgument for unknown names or bad parameters.
Family make_family(std::string_view name, int n, const FamilyBoxes& boxes,
                   const FamilyParams& params = {});

/// The families every suite covers: quadratic, bilinear, quartic_sum_form,
/// logconvex_sum_form.
std::vector<Family> shipped_families(int n);

}  // namespace hedonic
