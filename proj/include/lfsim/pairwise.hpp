#pragma once

#include <cstddef>

namespace lfsim {

/// Sum of term(0) + ... + term(n-1), accumulated as mirror pairs
/// (term(k) + term(n-1-k)) in increasing k, plus the middle term for odd n.
///
/// For a mirror-symmetric ensemble the pair sums of a reflected particle are
/// exact negations, so reflected sums come out bit-identical up to sign.
template <class Term>
double folded_sum(std::size_t n, Term&& term) {
  double sum = 0.0;
  const std::size_t half = n / 2;
  for (std::size_t k = 0; k < half; ++k) sum += term(k) + term(n - 1 - k);
  if (n % 2 == 1) sum += term(half);
  return sum;
}

}  // namespace lfsim
