#include "symchaos/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "symchaos/errors.hpp"

namespace symchaos {

namespace {

constexpr int kMaxWordLength = 24;

double log_in(double x, LogBase base) { return base == LogBase::Bits ? std::log2(x) : std::log(x); }

}  // namespace

BlockEntropyProfile block_entropies(Bits seq, const EntropyOptions& options) {
  const std::size_t n = seq.size();
  if (n == 0) throw DomainError("block_entropies: empty sequence");
  if (options.m_max < 1) throw ConfigError("block_entropies: m_max must be >= 1");
  const int top = options.m_max + 1;
  if (top > kMaxWordLength) throw ConfigError("block_entropies: m_max too large");
  if (options.counting == WordCounting::Overlapping && std::size_t(top) > n) {
    throw DomainError("block_entropies: sequence shorter than m_max + 1 symbols");
  }

  BlockEntropyProfile out;
  out.m_max = options.m_max;
  out.N = n;
  out.corrected = options.correction;
  out.base = options.base;
  out.H.assign(top + 1, 0.0);
  out.M.assign(top + 1, 0);
  out.M[0] = 1;

  const double correction_scale =
      options.base == LogBase::Bits ? 1.0 / (2.0 * double(n) * std::log(2.0)) : 1.0 / (2.0 * double(n));

  std::vector<std::size_t> counts;
  for (int m = 1; m <= top; ++m) {
    const std::uint32_t mask = (std::uint32_t(1) << m) - 1;
    counts.assign(std::size_t(1) << m, 0);
    const std::size_t words = options.counting == WordCounting::Cyclic ? n : n - m + 1;
    std::uint32_t code = 0;
    for (int k = 0; k < m - 1; ++k) code = (code << 1) | seq[k % n];
    for (std::size_t start = 0; start < words; ++start) {
      code = ((code << 1) | seq[(start + m - 1) % n]) & mask;
      ++counts[code];
    }
    double entropy = 0.0;
    std::size_t distinct = 0;
    for (std::size_t c : counts) {
      if (c == 0) continue;
      ++distinct;
      const double p = double(c) / double(words);
      entropy -= p * log_in(p, options.base);
    }
    if (options.correction) entropy += double(distinct - 1) * correction_scale;
    out.H[m] = entropy;
    out.M[m] = distinct;
  }
  out.h.resize(options.m_max + 1);
  for (int m = 0; m <= options.m_max; ++m) out.h[m] = out.H[m + 1] - out.H[m];
  return out;
}

double source_entropy_estimate(const BlockEntropyProfile& profile, int m_star) {
  if (m_star < 0 || m_star > profile.m_max) {
    throw DomainError("source_entropy_estimate: profile m_max is below the requested word length");
  }
  return profile.h[m_star];
}

namespace {

// Suffix automaton over a binary alphabet, grown one symbol at a time.
class SuffixAutomaton {
public:
  explicit SuffixAutomaton(std::size_t capacity) {
    states_.reserve(2 * capacity + 2);
    states_.push_back({});
  }

  struct State {
    std::int64_t next[2] = {-1, -1};
    std::int64_t link = -1;
    std::size_t len = 0;
    std::size_t first_end = 0;  // end position of the first occurrence
  };

  const State& operator[](std::int64_t i) const { return states_[std::size_t(i)]; }

  void extend(std::uint8_t c, std::size_t pos) {
    const std::int64_t cur = std::int64_t(states_.size());
    states_.push_back({});
    states_.back().len = states_[std::size_t(last_)].len + 1;
    states_.back().first_end = pos;
    std::int64_t p = last_;
    while (p != -1 && at(p).next[c] == -1) {
      at(p).next[c] = cur;
      p = at(p).link;
    }
    if (p == -1) {
      at(cur).link = 0;
    } else {
      const std::int64_t q = at(p).next[c];
      if (at(p).len + 1 == at(q).len) {
        at(cur).link = q;
      } else {
        const std::int64_t clone = std::int64_t(states_.size());
        State copy = at(q);
        copy.len = at(p).len + 1;
        states_.push_back(copy);
        while (p != -1 && at(p).next[c] == q) {
          at(p).next[c] = clone;
          p = at(p).link;
        }
        at(q).link = clone;
        at(cur).link = clone;
      }
    }
    last_ = cur;
  }

private:
  State& at(std::int64_t i) { return states_[std::size_t(i)]; }

  std::vector<State> states_;
  std::int64_t last_ = 0;
};

}  // namespace

std::vector<LzPhrase> lz76_parse(Bits seq) {
  const std::size_t n = seq.size();
  std::vector<LzPhrase> phrases;
  if (n == 0) return phrases;
  SuffixAutomaton sam(n);

  // The automaton always holds s[0..k). A phrase starting at i keeps
  // extending while s[i..k] occurs inside s[0..k).
  std::size_t start = 0;
  std::int64_t state = 0;
  std::size_t matched = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint8_t c = seq[k];
    const std::int64_t next = sam[state].next[c];
    if (next != -1) {
      state = next;
      ++matched;
    } else {
      LzPhrase phrase;
      phrase.length = matched;
      phrase.source = matched == 0 ? 0 : sam[state].first_end + 1 - matched;
      phrase.has_literal = true;
      phrase.literal = c;
      phrases.push_back(phrase);
      start = k + 1;
      state = 0;
      matched = 0;
    }
    sam.extend(c, k);
    // A clone created by the extension may now own the matched string.
    while (state != 0 && sam[sam[state].link].len >= matched) state = sam[state].link;
  }
  if (start < n) {
    LzPhrase phrase;
    phrase.length = matched;
    phrase.source = sam[state].first_end + 1 - matched;
    phrases.push_back(phrase);
  }
  return phrases;
}

std::vector<std::uint8_t> lz76_decode(std::span<const LzPhrase> phrases) {
  std::vector<std::uint8_t> out;
  for (const auto& ph : phrases) {
    if (ph.length > 0 && ph.source >= out.size()) throw DomainError("lz76_decode: phrase source out of range");
    for (std::size_t t = 0; t < ph.length; ++t) out.push_back(out[ph.source + t]);
    if (ph.has_literal) out.push_back(ph.literal);
  }
  return out;
}

LzResult lz76(Bits seq) {
  LzResult r;
  r.N = seq.size();
  r.phrase_count = lz76_parse(seq).size();
  r.lz = r.N == 0 ? 0.0 : double(r.phrase_count) * std::log2(double(r.N)) / double(r.N);
  return r;
}

MarkovMatrix2 markov_matrix(Bits seq) {
  MarkovMatrix2 m;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    const int from = seq[i], to = seq[i + 1];
    if (from == 1) {
      (to == 1 ? m.n11 : m.n10)++;
    } else {
      (to == 1 ? m.n01 : m.n00)++;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double from1 = double(m.n11 + m.n10);
  const double from0 = double(m.n01 + m.n00);
  m.p11 = from1 > 0 ? double(m.n11) / from1 : nan;
  m.p10 = from1 > 0 ? double(m.n10) / from1 : nan;
  m.p01 = from0 > 0 ? double(m.n01) / from0 : nan;
  m.p00 = from0 > 0 ? double(m.n00) / from0 : nan;
  return m;
}

double compressibility(Bits seq) {
  if (seq.empty()) return 0.0;
  const double s = double(lz76_parse(seq).size());
  const double compressed = s * (std::log2(s) + 1.0);
  return std::clamp(1.0 - compressed / double(seq.size()), 0.0, 1.0);
}

std::optional<int> detect_period(Bits seq, int max_period) {
  const std::size_t n = seq.size();
  if (max_period < 1 || std::size_t(max_period) * 4 > n) {
    throw DomainError("detect_period: max_period must lie in [1, N/4]");
  }
  const std::size_t tail = n / 2;
  for (int p = 1; p <= max_period; ++p) {
    bool periodic = true;
    for (std::size_t i = tail; i + p < n; ++i) {
      if (seq[i] != seq[i + p]) {
        periodic = false;
        break;
      }
    }
    if (periodic) return p;
  }
  return std::nullopt;
}

std::string periodic_code(Bits seq, int period) {
  if (period < 1 || std::size_t(period) > seq.size()) throw DomainError("periodic_code: bad period");
  std::string block(std::size_t(period), '0');
  const std::size_t base = seq.size() - std::size_t(period);
  for (int k = 0; k < period; ++k) block[k] = seq[base + k] ? '1' : '0';
  std::string best = block;
  for (int shift = 1; shift < period; ++shift) {
    std::rotate(block.begin(), block.begin() + 1, block.end());
    best = std::min(best, block);
  }
  return best;
}

ComplexityReport analyze(Bits seq, const ComplexityOptions& options) {
  ComplexityReport r;
  r.entropy = block_entropies(seq, options.entropy);
  r.source_entropy = source_entropy_estimate(r.entropy, std::min(options.m_star, options.entropy.m_max));
  r.markov = markov_matrix(seq);
  r.lz = lz76(seq);
  r.compressibility = compressibility(seq);
  const int max_period = std::min<int>(options.max_period, int(seq.size() / 4));
  if (max_period >= 1) {
    r.detected_period = detect_period(seq, max_period);
    if (r.detected_period) r.code = periodic_code(seq, *r.detected_period);
  }
  return r;
}

}  // namespace symchaos
