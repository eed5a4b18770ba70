#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pvs::expr {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Small expression language for user-defined Hamiltonians and data:
/// arithmetic, numeric-literal powers, sqrt/exp/sin/cos, named variables.
/// Derivatives are built symbolically when requested, so evaluation inside
/// the flow loops is plain tree walking with no differencing noise.
class Expression {
 public:
  Expression() = default;

  /// Parse against a fixed variable list; unknown identifiers are rejected.
  static Expression parse(const std::string& text, const std::vector<std::string>& vars);

  double eval(std::span<const double> values) const;
  Expression derivative(int var) const;
  bool is_constant() const;
  std::string str() const;
  int var_count() const { return nvars_; }

 private:
  Expression(NodePtr root, int nvars) : root_(std::move(root)), nvars_(nvars) {}
  NodePtr root_;
  int nvars_ = 0;
};

}  // namespace pvs::expr
