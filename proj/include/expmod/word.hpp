#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace expmod {

// Finite binary word, packed 64 symbols per block. Position 0 is the first
// (leftmost) symbol; all prefix semantics in this library refer to it.
class Word {
  public:
    Word() = default;

    explicit Word(std::size_t length, int fill = 0) : len_(length) {
        blocks_.assign((length + 63) / 64, fill ? ~0ull : 0ull);
        trim();
    }

    static Word from_string(const std::string& bits) {
        Word w;
        for (char c : bits) {
            if (c != '0' && c != '1') throw std::invalid_argument("word literal must be binary");
            w.push_back(c - '0');
        }
        return w;
    }

    std::size_t size() const { return len_; }
    bool empty() const { return len_ == 0; }

    int get(std::size_t i) const {
        return static_cast<int>((blocks_[i >> 6] >> (i & 63)) & 1u);
    }

    void set(std::size_t i, int bit) {
        std::uint64_t mask = 1ull << (i & 63);
        if (bit)
            blocks_[i >> 6] |= mask;
        else
            blocks_[i >> 6] &= ~mask;
    }

    void push_back(int bit) {
        if ((len_ & 63) == 0) blocks_.push_back(0);
        ++len_;
        set(len_ - 1, bit);
    }

    void append(const Word& other) {
        for (std::size_t i = 0; i < other.size(); ++i) push_back(other.get(i));
    }

    void truncate(std::size_t new_len) {
        if (new_len >= len_) return;
        len_ = new_len;
        blocks_.resize((len_ + 63) / 64);
        trim();
    }

    Word flipped() const {
        Word w = *this;
        for (auto& b : w.blocks_) b = ~b;
        w.trim();
        return w;
    }

    bool is_prefix_of(const Word& longer) const {
        if (len_ > longer.len_) return false;
        for (std::size_t i = 0; i < len_; ++i)
            if (get(i) != longer.get(i)) return false;
        return true;
    }

    bool operator==(const Word& o) const {
        return len_ == o.len_ && blocks_ == o.blocks_;
    }
    bool operator!=(const Word& o) const { return !(*this == o); }

    std::string to_string() const {
        std::string s(len_, '0');
        for (std::size_t i = 0; i < len_; ++i) s[i] = char('0' + get(i));
        return s;
    }

  private:
    void trim() {
        if (len_ & 63 && !blocks_.empty()) blocks_.back() &= (1ull << (len_ & 63)) - 1;
        if (len_ == 0) blocks_.clear();
    }

    std::vector<std::uint64_t> blocks_;
    std::size_t len_ = 0;
};

// The two local substitution rules: expansion duplicates a symbol, while
// modification negates it.
enum class Sub : std::uint8_t { expand = 0, modify = 1 };

using SubstitutionWord = std::vector<Sub>;

inline SubstitutionWord subs_from_string(const std::string& s) {
    SubstitutionWord out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == 'e')
            out.push_back(Sub::expand);
        else if (c == 'm')
            out.push_back(Sub::modify);
        else
            throw std::invalid_argument("substitution literal must use 'e'/'m'");
    }
    return out;
}

inline Word apply_local(Sub s, int bit) {
    Word w;
    if (s == Sub::expand) {
        w.push_back(bit);
        w.push_back(bit);
    } else {
        w.push_back(bit ^ 1);
    }
    return w;
}

// Applies s coordinate-wise to w and concatenates the local outputs. The
// substitution word must cover every input symbol; extra entries are unused.
inline Word apply_global(const SubstitutionWord& s, const Word& w) {
    if (s.size() < w.size())
        throw std::length_error("substitution word shorter than input word");
    Word out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        int bit = w.get(i);
        if (s[i] == Sub::expand) {
            out.push_back(bit);
            out.push_back(bit);
        } else {
            out.push_back(bit ^ 1);
        }
    }
    return out;
}

}  // namespace expmod
