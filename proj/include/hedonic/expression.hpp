#pragma once

#include "hedonic/linalg.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace hedonic {

/// Closed-form scalar expression over named variables.
///
/// Grammar: + - * / ^ (right associative), unary minus, parentheses, numbers,
/// the constants pi and e, and the functions exp log sqrt sin cos tan sinh
/// cosh tanh abs. Parse errors throw Error(kInvalidArgument) naming the column.
class Expression {
 public:
  /// Maps a variable name to its position in the argument vector.
  using Resolver = std::function<std::optional<int>(std::string_view)>;

  static Expression parse(std::string_view text, const Resolver& resolve);

  double operator()(const Vector& args) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

/// Resolver for arguments laid out as [a; z] with a named `a_name`:
/// a1..an, a_1..a_n, z1..zn, z_1..z_n, and bare a / z when n = 1.
Expression::Resolver block_resolver(char a_name, int n);

}  // namespace hedonic
