#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace lppl::sha2 {

namespace detail {

template <typename Word>
constexpr Word rotr(Word x, unsigned n) {
    return static_cast<Word>((x >> n) | (x << (sizeof(Word) * 8 - n)));
}

struct Sha256Traits {
    using Word = std::uint32_t;
    static constexpr std::size_t rounds = 64;
    static constexpr std::size_t block_bytes = 64;
    static constexpr std::size_t length_bytes = 8;
    static constexpr std::size_t digest_words = 8;
    static constexpr std::array<unsigned, 3> big_sigma0{2, 13, 22};
    static constexpr std::array<unsigned, 3> big_sigma1{6, 11, 25};
    static constexpr std::array<unsigned, 3> small_sigma0{7, 18, 3};  // last entry is a shift
    static constexpr std::array<unsigned, 3> small_sigma1{17, 19, 10};
    static constexpr std::array<Word, 8> initial{0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u,
                                                 0xa54ff53au, 0x510e527fu, 0x9b05688cu,
                                                 0x1f83d9abu, 0x5be0cd19u};
    static constexpr std::array<Word, 64> k{
        0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u,
        0x923f82a4u, 0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u,
        0x72be5d74u, 0x80deb1feu, 0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u,
        0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu, 0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau,
        0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u, 0xc6e00bf3u, 0xd5a79147u,
        0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu, 0x53380d13u,
        0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
        0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u,
        0x19a4c116u, 0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au,
        0x5b9cca4fu, 0x682e6ff3u, 0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u,
        0x90befffau, 0xa4506cebu, 0xbef9a3f7u, 0xc67178f2u};
};

struct Sha512Traits {
    using Word = std::uint64_t;
    static constexpr std::size_t rounds = 80;
    static constexpr std::size_t block_bytes = 128;
    static constexpr std::size_t length_bytes = 16;
    static constexpr std::size_t digest_words = 8;
    static constexpr std::array<unsigned, 3> big_sigma0{28, 34, 39};
    static constexpr std::array<unsigned, 3> big_sigma1{14, 18, 41};
    static constexpr std::array<unsigned, 3> small_sigma0{1, 8, 7};  // last entry is a shift
    static constexpr std::array<unsigned, 3> small_sigma1{19, 61, 6};
    static constexpr std::array<Word, 8> initial{
        0x6a09e667f3bcc908ULL, 0xbb67ae8584caa73bULL, 0x3c6ef372fe94f82bULL,
        0xa54ff53a5f1d36f1ULL, 0x510e527fade682d1ULL, 0x9b05688c2b3e6c1fULL,
        0x1f83d9abfb41bd6bULL, 0x5be0cd19137e2179ULL};
    static constexpr std::array<Word, 80> k{
        0x428a2f98d728ae22ULL, 0x7137449123ef65cdULL, 0xb5c0fbcfec4d3b2fULL,
        0xe9b5dba58189dbbcULL, 0x3956c25bf348b538ULL, 0x59f111f1b605d019ULL,
        0x923f82a4af194f9bULL, 0xab1c5ed5da6d8118ULL, 0xd807aa98a3030242ULL,
        0x12835b0145706fbeULL, 0x243185be4ee4b28cULL, 0x550c7dc3d5ffb4e2ULL,
        0x72be5d74f27b896fULL, 0x80deb1fe3b1696b1ULL, 0x9bdc06a725c71235ULL,
        0xc19bf174cf692694ULL, 0xe49b69c19ef14ad2ULL, 0xefbe4786384f25e3ULL,
        0x0fc19dc68b8cd5b5ULL, 0x240ca1cc77ac9c65ULL, 0x2de92c6f592b0275ULL,
        0x4a7484aa6ea6e483ULL, 0x5cb0a9dcbd41fbd4ULL, 0x76f988da831153b5ULL,
        0x983e5152ee66dfabULL, 0xa831c66d2db43210ULL, 0xb00327c898fb213fULL,
        0xbf597fc7beef0ee4ULL, 0xc6e00bf33da88fc2ULL, 0xd5a79147930aa725ULL,
        0x06ca6351e003826fULL, 0x142929670a0e6e70ULL, 0x27b70a8546d22ffcULL,
        0x2e1b21385c26c926ULL, 0x4d2c6dfc5ac42aedULL, 0x53380d139d95b3dfULL,
        0x650a73548baf63deULL, 0x766a0abb3c77b2a8ULL, 0x81c2c92e47edaee6ULL,
        0x92722c851482353bULL, 0xa2bfe8a14cf10364ULL, 0xa81a664bbc423001ULL,
        0xc24b8b70d0f89791ULL, 0xc76c51a30654be30ULL, 0xd192e819d6ef5218ULL,
        0xd69906245565a910ULL, 0xf40e35855771202aULL, 0x106aa07032bbd1b8ULL,
        0x19a4c116b8d2d0c8ULL, 0x1e376c085141ab53ULL, 0x2748774cdf8eeb99ULL,
        0x34b0bcb5e19b48a8ULL, 0x391c0cb3c5c95a63ULL, 0x4ed8aa4ae3418acbULL,
        0x5b9cca4f7763e373ULL, 0x682e6ff3d6b2b8a3ULL, 0x748f82ee5defb2fcULL,
        0x78a5636f43172f60ULL, 0x84c87814a1f0ab72ULL, 0x8cc702081a6439ecULL,
        0x90befffa23631e28ULL, 0xa4506cebde82bde9ULL, 0xbef9a3f7b2c67915ULL,
        0xc67178f2e372532bULL, 0xca273eceea26619cULL, 0xd186b8c721c0c207ULL,
        0xeada7dd6cde0eb1eULL, 0xf57d4f7fee6ed178ULL, 0x06f067aa72176fbaULL,
        0x0a637dc5a2c898a6ULL, 0x113f9804bef90daeULL, 0x1b710b35131c471bULL,
        0x28db77f523047d84ULL, 0x32caab7b40c72493ULL, 0x3c9ebe0a15c9bebcULL,
        0x431d67c49c100d4cULL, 0x4cc5d4becb3e42b6ULL, 0x597f299cfc657e2aULL,
        0x5fcb6fab3ad6faecULL, 0x6c44198c4a475817ULL};
};

/// FIPS 180-4 compression over Merkle-Damgard padding; SHA-256 and SHA-512
/// differ only in word size, round count and constants.
template <typename Traits>
class Engine {
public:
    using Word = typename Traits::Word;
    static constexpr std::size_t digest_size = Traits::digest_words * sizeof(Word);

    Engine() : state_(Traits::initial) {}

    void update(const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        total_bytes_ += len;
        if (buffered_ > 0) {
            const std::size_t take = std::min(len, Traits::block_bytes - buffered_);
            std::memcpy(buffer_.data() + buffered_, bytes, take);
            buffered_ += take;
            bytes += take;
            len -= take;
            if (buffered_ == Traits::block_bytes) {
                compress(buffer_.data());
                buffered_ = 0;
            }
        }
        while (len >= Traits::block_bytes) {
            compress(bytes);
            bytes += Traits::block_bytes;
            len -= Traits::block_bytes;
        }
        if (len > 0) {
            std::memcpy(buffer_.data(), bytes, len);
            buffered_ = len;
        }
    }

    std::array<unsigned char, digest_size> finish() {
        const std::uint64_t bit_count = total_bytes_ * 8;
        const unsigned char one = 0x80;
        update(&one, 1);
        const unsigned char zero = 0x00;
        while (buffered_ != Traits::block_bytes - Traits::length_bytes)
            update(&zero, 1);
        // big-endian length field; the high half stays zero since lengths
        // are tracked in a 64-bit byte count
        std::array<unsigned char, Traits::length_bytes> length_field{};
        for (std::size_t i = 0; i < 8; ++i)
            length_field[Traits::length_bytes - 1 - i] =
                static_cast<unsigned char>(bit_count >> (8 * i));
        update(length_field.data(), Traits::length_bytes);

        std::array<unsigned char, digest_size> digest{};
        for (std::size_t w = 0; w < Traits::digest_words; ++w)
            for (std::size_t b = 0; b < sizeof(Word); ++b)
                digest[w * sizeof(Word) + b] =
                    static_cast<unsigned char>(state_[w] >> (8 * (sizeof(Word) - 1 - b)));
        return digest;
    }

private:
    static Word load_word(const unsigned char* p) {
        Word w = 0;
        for (std::size_t b = 0; b < sizeof(Word); ++b)
            w = static_cast<Word>((w << 8) | p[b]);
        return w;
    }

    void compress(const unsigned char* block) {
        std::array<Word, Traits::rounds> schedule;
        for (std::size_t i = 0; i < 16; ++i)
            schedule[i] = load_word(block + i * sizeof(Word));
        for (std::size_t i = 16; i < Traits::rounds; ++i) {
            const Word s0 = rotr(schedule[i - 15], Traits::small_sigma0[0]) ^
                            rotr(schedule[i - 15], Traits::small_sigma0[1]) ^
                            (schedule[i - 15] >> Traits::small_sigma0[2]);
            const Word s1 = rotr(schedule[i - 2], Traits::small_sigma1[0]) ^
                            rotr(schedule[i - 2], Traits::small_sigma1[1]) ^
                            (schedule[i - 2] >> Traits::small_sigma1[2]);
            schedule[i] =
                static_cast<Word>(schedule[i - 16] + s0 + schedule[i - 7] + s1);
        }
        Word a = state_[0], b = state_[1], c = state_[2], d = state_[3];
        Word e = state_[4], f = state_[5], g = state_[6], h = state_[7];
        for (std::size_t i = 0; i < Traits::rounds; ++i) {
            const Word S1 = rotr(e, Traits::big_sigma1[0]) ^ rotr(e, Traits::big_sigma1[1]) ^
                            rotr(e, Traits::big_sigma1[2]);
            const Word ch = (e & f) ^ (~e & g);
            const Word temp1 = static_cast<Word>(h + S1 + ch + Traits::k[i] + schedule[i]);
            const Word S0 = rotr(a, Traits::big_sigma0[0]) ^ rotr(a, Traits::big_sigma0[1]) ^
                            rotr(a, Traits::big_sigma0[2]);
            const Word maj = (a & b) ^ (a & c) ^ (b & c);
            const Word temp2 = static_cast<Word>(S0 + maj);
            h = g;
            g = f;
            f = e;
            e = static_cast<Word>(d + temp1);
            d = c;
            c = b;
            b = a;
            a = static_cast<Word>(temp1 + temp2);
        }
        state_[0] = static_cast<Word>(state_[0] + a);
        state_[1] = static_cast<Word>(state_[1] + b);
        state_[2] = static_cast<Word>(state_[2] + c);
        state_[3] = static_cast<Word>(state_[3] + d);
        state_[4] = static_cast<Word>(state_[4] + e);
        state_[5] = static_cast<Word>(state_[5] + f);
        state_[6] = static_cast<Word>(state_[6] + g);
        state_[7] = static_cast<Word>(state_[7] + h);
    }

    std::array<Word, 8> state_;
    std::array<unsigned char, Traits::block_bytes> buffer_{};
    std::size_t buffered_ = 0;
    std::uint64_t total_bytes_ = 0;
};

}  // namespace detail

using Sha256 = detail::Engine<detail::Sha256Traits>;
using Sha512 = detail::Engine<detail::Sha512Traits>;

template <std::size_t N>
std::string to_hex(const std::array<unsigned char, N>& digest) {
    static constexpr char alphabet[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * N);
    for (const unsigned char byte : digest) {
        out.push_back(alphabet[byte >> 4]);
        out.push_back(alphabet[byte & 0x0f]);
    }
    return out;
}

inline std::string sha256_hex(std::string_view bytes) {
    Sha256 engine;
    engine.update(bytes.data(), bytes.size());
    return to_hex(engine.finish());
}

inline std::string sha512_hex(std::string_view bytes) {
    Sha512 engine;
    engine.update(bytes.data(), bytes.size());
    return to_hex(engine.finish());
}

}  // namespace lppl::sha2
