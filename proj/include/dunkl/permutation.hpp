#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dunkl {

/// Permutation of {0, .., n-1}, stored as the image table sigma(i) = img[i].
///
/// Acting on functions: (P_sigma f)(x_0,..) = f(x_{sigma(0)}, ..), which gives
/// the conjugation rules  P_sigma x_i = x_{sigma(i)} P_sigma  and
/// P_sigma d_i = d_{sigma(i)} P_sigma, and composition P_sigma P_tau = P_{sigma tau}
/// with (sigma tau)(i) = sigma(tau(i)).
class Permutation {
  public:
    Permutation() = default;
    explicit Permutation(std::vector<uint8_t> images) : img_(std::move(images)) {}

    static Permutation identity(int n) {
        std::vector<uint8_t> v(n);
        for (int i = 0; i < n; ++i) v[i] = static_cast<uint8_t>(i);
        return Permutation(std::move(v));
    }

    static Permutation transposition(int n, int i, int j) {
        Permutation p = identity(n);
        p.img_[i] = static_cast<uint8_t>(j);
        p.img_[j] = static_cast<uint8_t>(i);
        return p;
    }

    int size() const { return static_cast<int>(img_.size()); }
    int operator()(int i) const { return img_[i]; }

    bool is_identity() const {
        for (int i = 0; i < size(); ++i)
            if (img_[i] != i) return false;
        return true;
    }

    /// this ∘ other: i -> this(other(i)).
    Permutation compose(const Permutation& other) const {
        if (size() != other.size()) throw std::invalid_argument("permutation size mismatch");
        std::vector<uint8_t> v(img_.size());
        for (int i = 0; i < size(); ++i) v[i] = img_[other.img_[i]];
        return Permutation(std::move(v));
    }

    Permutation inverse() const {
        std::vector<uint8_t> v(img_.size());
        for (int i = 0; i < size(); ++i) v[img_[i]] = static_cast<uint8_t>(i);
        return Permutation(std::move(v));
    }

    /// Packs images into 3-bit fields; valid for n <= 8.
    uint32_t code() const {
        uint32_t c = 0;
        for (int i = 0; i < size(); ++i) c |= static_cast<uint32_t>(img_[i]) << (3 * i);
        return c;
    }

    static Permutation from_code(uint32_t c, int n) {
        std::vector<uint8_t> v(n);
        for (int i = 0; i < n; ++i) v[i] = static_cast<uint8_t>((c >> (3 * i)) & 0x7u);
        return Permutation(std::move(v));
    }

    friend auto operator<=>(const Permutation&, const Permutation&) = default;

    /// One-line notation with 1-based labels, e.g. "(2 1 3)".
    std::string to_string() const {
        std::string s = "(";
        for (int i = 0; i < size(); ++i) {
            if (i) s += ' ';
            s += std::to_string(img_[i] + 1);
        }
        return s + ")";
    }

  private:
    std::vector<uint8_t> img_;
};

/// All permutations of {0..n-1} in lexicographic order.
inline std::vector<Permutation> all_permutations(int n) {
    std::vector<uint8_t> v(n);
    for (int i = 0; i < n; ++i) v[i] = static_cast<uint8_t>(i);
    std::vector<Permutation> out;
    do {
        out.emplace_back(v);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

}  // namespace dunkl
