#include "sbeam/convcode.hpp"

#include <array>
#include <limits>

#include "sbeam/errors.hpp"

namespace sbeam {

namespace {

constexpr int kConstraint = 7;
constexpr int kTail = kConstraint - 1;  // 6 zero flush bits
constexpr int kStates = 1 << kTail;     // 64
// Generators written MSB = current input bit: 133 = D^0+D^2+D^3+D^5+D^6,
// 171 = D^0+D^1+D^2+D^3+D^6.
constexpr unsigned kG0 = 0133;
constexpr unsigned kG1 = 0171;

std::uint8_t parity(unsigned v) {
  v ^= v >> 16;
  v ^= v >> 8;
  v ^= v >> 4;
  v ^= v >> 2;
  v ^= v >> 1;
  return v & 1u;
}

// Register word for (state, input): input in bit 6, previous bits below.
struct Branch {
  std::uint8_t out0, out1;
  std::uint8_t next;
};

const std::array<Branch, kStates * 2>& branch_table() {
  static const std::array<Branch, kStates * 2> table = [] {
    std::array<Branch, kStates * 2> t{};
    for (int state = 0; state < kStates; ++state) {
      for (int in = 0; in < 2; ++in) {
        const unsigned w = (static_cast<unsigned>(in) << kTail) | state;
        Branch& b = t[state * 2 + in];
        b.out0 = parity(w & kG0);
        b.out1 = parity(w & kG1);
        b.next = static_cast<std::uint8_t>(w >> 1);
      }
    }
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::uint8_t> bcc_encode(const std::vector<std::uint8_t>& bits) {
  const auto& table = branch_table();
  std::vector<std::uint8_t> out;
  out.reserve(2 * (bits.size() + kTail));
  int state = 0;
  auto push = [&](std::uint8_t bit) {
    const Branch& b = table[state * 2 + (bit & 1)];
    out.push_back(b.out0);
    out.push_back(b.out1);
    state = b.next;
  };
  for (std::uint8_t bit : bits) push(bit);
  for (int i = 0; i < kTail; ++i) push(0);
  return out;
}

std::vector<std::uint8_t> viterbi_decode(
    const std::vector<std::uint8_t>& coded) {
  if (coded.size() % 2 != 0)
    throw InvalidInput("coded length must be even");
  const std::size_t n_steps = coded.size() / 2;
  if (n_steps < kTail)
    throw InvalidInput("coded payload shorter than the tail");

  const auto& table = branch_table();
  constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max() / 2;

  std::vector<std::uint32_t> cost(kStates, kInf), next_cost(kStates);
  cost[0] = 0;  // encoder starts in the zero state
  // decisions[step][next_state]: (prev_state << 1) | input, 0xffff = none.
  std::vector<std::uint16_t> decisions(n_steps * kStates, 0xffff);

  for (std::size_t step = 0; step < n_steps; ++step) {
    const std::uint8_t r0 = coded[2 * step] & 1;
    const std::uint8_t r1 = coded[2 * step + 1] & 1;
    std::fill(next_cost.begin(), next_cost.end(), kInf);
    std::uint16_t* dec = &decisions[step * kStates];
    for (int state = 0; state < kStates; ++state) {
      if (cost[state] >= kInf) continue;
      for (int in = 0; in < 2; ++in) {
        const Branch& b = table[state * 2 + in];
        const std::uint32_t metric =
            cost[state] + (b.out0 != r0) + (b.out1 != r1);
        if (metric < next_cost[b.next]) {
          next_cost[b.next] = metric;
          dec[b.next] = static_cast<std::uint16_t>((state << 1) | in);
        }
      }
    }
    cost.swap(next_cost);
  }

  // Tail bits force the encoder back to state 0; trace back from there.
  int state = 0;
  std::vector<std::uint8_t> bits(n_steps);
  for (std::size_t step = n_steps; step-- > 0;) {
    const std::uint16_t d = decisions[step * kStates + state];
    if (d == 0xffff) throw InvalidInput("trellis traceback failed");
    bits[step] = d & 1;
    state = d >> 1;
  }
  bits.resize(n_steps - kTail);  // strip the flush bits
  return bits;
}

}  // namespace sbeam
