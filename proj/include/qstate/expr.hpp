#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace qstate {

/// Variables an expression may reference. Sphere fields use the embedding
/// coordinates (x, y, z); torus and patch fields use the chart (u, v).
enum class Var : int { x = 0, y, z, u, v };

inline constexpr std::size_t kVarCount = 5;

using VarValues = std::array<double, kVarCount>;

/// A parsed arithmetic expression over the grammar
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' unary)?
///   primary := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
///   func    := sin | cos | exp
///
/// '^' binds tighter than unary minus, so "-x^2" is -(x^2). Parsing throws
/// std::invalid_argument on malformed input or unknown identifiers.
class Expression {
 public:
  static Expression parse(std::string_view text);

  double evaluate(const VarValues& vars) const;
  /// out[i] = evaluate(vars[i]), bit for bit, walking the tree once per call.
  void evaluate_batch(std::span<const VarValues> vars, std::span<double> out) const;
  bool uses(Var var) const { return (used_mask_ >> static_cast<int>(var)) & 1u; }
  const std::string& text() const { return text_; }

  struct Node;

 private:
  Expression(std::string text, std::shared_ptr<const Node> root, unsigned used)
      : text_(std::move(text)), root_(std::move(root)), used_mask_(used) {}

  std::string text_;
  std::shared_ptr<const Node> root_;
  unsigned used_mask_ = 0;
};

}  // namespace qstate
