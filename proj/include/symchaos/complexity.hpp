#pragma once

// Complexity measures of binary symbol sequences: block and conditional
// entropies, LZ76 complexity, the 2-state Markov transition matrix,
// compressibility and period detection.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace symchaos {

using Bits = std::span<const std::uint8_t>;

enum class LogBase { Bits, Nats };

enum class WordCounting {
  Overlapping,  // sliding window, N - m + 1 words
  Cyclic,       // words wrap around the end, N words
};

struct EntropyOptions {
  int m_max = 6;
  bool correction = true;
  LogBase base = LogBase::Bits;
  WordCounting counting = WordCounting::Overlapping;
};

/// Block entropies indexed by word length: H[m] for m = 0..m_max+1 with
/// H[0] = 0, conditional entropies h[m] = H[m+1] - H[m] for m = 0..m_max
/// (so h[0] = H[1]), and distinct-word counts M[m].
struct BlockEntropyProfile {
  int m_max = 0;
  std::vector<double> H;
  std::vector<double> h;
  std::vector<std::size_t> M;
  std::size_t N = 0;
  bool corrected = false;
  LogBase base = LogBase::Bits;
};

BlockEntropyProfile block_entropies(Bits seq, const EntropyOptions& options = {});

/// h_{m*}, the finite-word estimate of the source entropy.
double source_entropy_estimate(const BlockEntropyProfile& profile, int m_star = 6);

/// One LZ76 phrase: `length` symbols copied from `source` (the copy may run
/// into the phrase itself), followed by a literal unless the input ended.
struct LzPhrase {
  std::size_t source = 0;
  std::size_t length = 0;
  bool has_literal = false;
  std::uint8_t literal = 0;
};

struct LzResult {
  std::size_t phrase_count = 0;
  double lz = 0.0;  // phrase_count * log2(N) / N
  std::size_t N = 0;
};

/// Exhaustive-history LZ76 parsing, linear time (suffix automaton).
std::vector<LzPhrase> lz76_parse(Bits seq);
std::vector<std::uint8_t> lz76_decode(std::span<const LzPhrase> phrases);
LzResult lz76(Bits seq);

/// Transition probabilities p_ab = P(next = b | current = a). A probability
/// whose source symbol never occurs is NaN.
struct MarkovMatrix2 {
  double p11 = 0, p10 = 0, p01 = 0, p00 = 0;
  std::size_t n11 = 0, n10 = 0, n01 = 0, n00 = 0;

  /// Layout [[p11, p01], [p10, p00]].
  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << p11, p01, p10, p00;
    return m;
  }
};

MarkovMatrix2 markov_matrix(Bits seq);

/// R = 1 - L_comp / N with L_comp = s (log2 s + 1) bits, clamped to [0, 1].
double compressibility(Bits seq);

/// Smallest p <= max_period with s[i] == s[i+p] over the final half.
std::optional<int> detect_period(Bits seq, int max_period);

/// The repeating block of a p-periodic tail, as its lexicographically
/// smallest rotation ("000111" rather than "011100").
std::string periodic_code(Bits seq, int period);

struct ComplexityOptions {
  EntropyOptions entropy{};
  int m_star = 6;
  int max_period = 64;
};

struct ComplexityReport {
  BlockEntropyProfile entropy;
  double source_entropy = 0.0;
  MarkovMatrix2 markov;
  LzResult lz;
  double compressibility = 0.0;
  std::optional<int> detected_period;
  std::string code;  // empty unless a period was detected
};

ComplexityReport analyze(Bits seq, const ComplexityOptions& options = {});

}  // namespace symchaos
