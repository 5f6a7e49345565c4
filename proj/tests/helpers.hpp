#pragma once

#include "doctest.h"
#include "fnet/common.hpp"
#include "fnet/network.hpp"
#include "fnet/rng.hpp"

// Checks that `expr` throws fnet::Error with the given code.
#define CHECK_FNET_ERROR(expr, expected)                        \
    do {                                                        \
        bool thrown_ = false;                                   \
        try {                                                   \
            (void)(expr);                                       \
        } catch (const fnet::Error& e_) {                       \
            thrown_ = true;                                     \
            CHECK(e_.code() == (expected));                     \
        }                                                       \
        CHECK_MESSAGE(thrown_, "expected error " #expected);    \
    } while (0)

namespace testutil {

inline fnet::Matrix random_matrix(fnet::Rng& rng, int r, int c) {
    fnet::Matrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
    return m;
}

/// Symmetric zero-diagonal weights uniform in [-1,1].
inline fnet::FeatureNetwork random_signed_network(fnet::Rng& rng, int p) {
    fnet::FeatureNetwork g;
    g.p = p;
    g.W = fnet::Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            double w = rng.uniform(-1.0, 1.0);
            g.W(i, j) = w;
            g.W(j, i) = w;
        }
    return g;
}

/// Planted block graph: weight `intra` inside each block, `inter` across.
inline fnet::FeatureNetwork block_network(const std::vector<int>& sizes, double intra,
                                          double inter) {
    int p = 0;
    for (int s : sizes) p += s;
    std::vector<int> block(p);
    int at = 0;
    for (std::size_t b = 0; b < sizes.size(); ++b)
        for (int s = 0; s < sizes[b]; ++s) block[at++] = static_cast<int>(b);
    fnet::FeatureNetwork g;
    g.p = p;
    g.W = fnet::Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            double w = block[i] == block[j] ? intra : inter;
            g.W(i, j) = w;
            g.W(j, i) = w;
        }
    return g;
}

}  // namespace testutil
