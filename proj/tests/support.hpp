#pragma once

#include <dilatone/io.hpp>

#include <random>
#include <string>

namespace dilatone::testing {

inline std::string corpus(const std::string& name) { return std::string(DILATONE_CORPUS_DIR) + "/" + name + ".json"; }

inline DilationSurface load(const std::string& name) { return load_surface(corpus(name)); }

/// Small random rationals num/den with |num| <= range, 1 <= den <= max_den.
class RationalGen {
public:
    explicit RationalGen(unsigned seed, long range = 20, long max_den = 8) : rng_(seed), num_(-range, range), den_(1, max_den) {}
    Scalar operator()()
    {
        Scalar q(num_(rng_), den_(rng_));
        q.canonicalize();
        return q;
    }
    Point point() { return {(*this)(), (*this)()}; }
    std::mt19937& rng() { return rng_; }

private:
    std::mt19937 rng_;
    std::uniform_int_distribution<long> num_, den_;
};

/// Generic n x n determinant by cofactor expansion.
inline Scalar det_cofactor(const std::vector<std::vector<Scalar>>& m)
{
    std::size_t n = m.size();
    if (n == 1) return m[0][0];
    Scalar acc = 0;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::vector<Scalar>> minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<Scalar> row;
            for (std::size_t k = 0; k < n; ++k)
                if (k != c) row.push_back(m[r][k]);
            minor.push_back(row);
        }
        Scalar term = m[0][c] * det_cofactor(minor);
        acc += (c % 2 == 0) ? term : Scalar(-term);
    }
    return acc;
}

}  // namespace dilatone::testing
