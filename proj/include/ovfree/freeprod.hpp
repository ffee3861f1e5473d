#pragma once

// Mixed moments in the amalgamated free product (B, E_B) *_A (C, E_C),
// where B is generated by a realized X and C = C*(lambda(A), v) lives on a
// truncated Fock space. Only the freeness axiom is used: E vanishes on
// alternating products of centered letters.

#include "ovfree/algebra.hpp"
#include "ovfree/cpmaps.hpp"
#include "ovfree/fock.hpp"
#include "ovfree/ovdist.hpp"

#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

namespace ovfree {

class FreeProductModel;

/// Alternating word in B- and C-letters. A-letters are absorbed into their
/// neighbours as they are pushed, so the stored letters always alternate.
class MixedWord {
 public:
  /// B-letters are d x d matrices in the realization algebra, C-letters Fock
  /// operators.
  using Letter = std::variant<Mat, FockOp>;

  explicit MixedWord(const FreeProductModel& model);

  MixedWord& push_a(const Mat& a);
  MixedWord& push_b(const Mat& b);
  MixedWord& push_c(const FockOp& c);

  const std::vector<std::shared_ptr<const Letter>>& letters() const { return letters_; }
  /// Pending A factor when the word has no B/C letter yet.
  const Mat& scalar() const { return scalar_; }

 private:
  const FreeProductModel* model_;
  Mat scalar_;
  std::vector<std::shared_ptr<const Letter>> letters_;
};

class FreeProductModel {
 public:
  FreeProductModel(Realization realization, std::shared_ptr<const FockSpace> fock);

  std::size_t k() const { return realization_.k; }
  const Realization& realization() const { return realization_; }
  const std::shared_ptr<const FockSpace>& fock() const { return fock_; }

  /// E_A of the word.
  Mat evaluate(const MixedWord& w) const;

  /// Smallest Fock depth at which the word is evaluated without truncation.
  std::size_t required_depth(const MixedWord& w) const;

  // Letter algebra used by MixedWord and the recursion.
  Mat expect(const MixedWord::Letter& x) const;
  MixedWord::Letter centered(const MixedWord::Letter& x) const;
  /// x * a * y for letters on the same side.
  MixedWord::Letter join(const MixedWord::Letter& x, const Mat& a, const MixedWord::Letter& y) const;
  MixedWord::Letter times_left(const Mat& a, const MixedWord::Letter& x) const;
  MixedWord::Letter times_right(const MixedWord::Letter& x, const Mat& a) const;

 private:
  using LetterPtr = std::shared_ptr<const MixedWord::Letter>;

  Mat expect_word(const std::vector<LetterPtr>& w, std::size_t centered_prefix) const;

  Realization realization_;
  std::shared_ptr<const FockSpace> fock_;
};

inline constexpr std::size_t kCompressedOrderLimit = 6;
/// v^* (X v a v^*) ... X v only ever raises one degree above its input.
inline constexpr std::size_t kCompressedMinimalDepth = 2;

/// Distribution of v^* X v with v built from psi = eta - id. Requires
/// eta - id completely positive. depth defaults to the smallest exact depth.
OVDistribution compressed_distribution(const Realization& r, const CPMap& eta, std::size_t order,
                                       std::size_t depth = 0, double tol = kDefaultTol);

}  // namespace ovfree
