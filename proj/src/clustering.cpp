#include "fnet/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fnet/rng.hpp"

namespace fnet {

void Partition::validate() const {
    require(static_cast<int>(assign.size()) == p, Err::partition_mismatch,
            "assignment length must equal node count");
    require(d >= 1 && d <= p, Err::invalid_k, "cluster count must be in [1,p]");
    std::vector<char> seen(d, 0);
    for (int a : assign) {
        require(a >= 0 && a < d, Err::partition_mismatch, "cluster id out of range");
        seen[a] = 1;
    }
    for (int j = 0; j < d; ++j)
        require(seen[j], Err::partition_mismatch, "cluster " + std::to_string(j) + " is empty");
}

std::vector<std::vector<int>> Partition::members() const {
    std::vector<std::vector<int>> m(d);
    for (int i = 0; i < p; ++i) m[assign[i]].push_back(i);
    return m;
}

Partition Partition::canonical() const {
    std::vector<int> relabel(d, -1);
    int next = 0;
    Partition out;
    out.p = p;
    out.d = d;
    out.assign.resize(p);
    for (int i = 0; i < p; ++i) {
        if (relabel[assign[i]] < 0) relabel[assign[i]] = next++;
        out.assign[i] = relabel[assign[i]];
    }
    return out;
}

void SoftPartition::validate() const {
    require(U.rows() == d && U.cols() == p, Err::partition_mismatch,
            "membership matrix must be d x p");
    for (int i = 0; i < p; ++i) {
        double col = 0.0;
        for (int j = 0; j < d; ++j) {
            require(U(j, i) >= 0.0 && U(j, i) <= 1.0, Err::partition_mismatch,
                    "memberships must lie in [0,1]");
            col += U(j, i);
        }
        require(std::fabs(col - 1.0) <= 1e-9, Err::partition_mismatch,
                "membership column must sum to 1");
    }
    for (int j = 0; j < d; ++j)
        require(U.row(j).cwiseAbs().maxCoeff() > 0.0, Err::partition_mismatch,
                "membership row " + std::to_string(j) + " is all zero");
}

Partition SoftPartition::harden() const {
    Partition out;
    out.p = p;
    out.d = d;
    out.assign.resize(p);
    for (int i = 0; i < p; ++i) {
        int best = 0;
        for (int j = 1; j < d; ++j)
            if (U(j, i) > U(best, i)) best = j;  // ties toward lower index
        out.assign[i] = best;
    }
    // hardening can empty a cluster; keep labels compact
    std::vector<int> count(d, 0);
    for (int a : out.assign) count[a]++;
    if (std::find(count.begin(), count.end(), 0) != count.end()) {
        std::vector<int> relabel(d, -1);
        int next = 0;
        for (int j = 0; j < d; ++j)
            if (count[j] > 0) relabel[j] = next++;
        for (int& a : out.assign) a = relabel[a];
        out.d = next;
    }
    return out;
}

DistanceMatrix dissimilarity_from_weights(const FeatureNetwork& g) {
    DistanceMatrix dm;
    dm.p = g.p;
    dm.D = Matrix::Zero(g.p, g.p);
    for (int i = 0; i < g.p; ++i)
        for (int j = 0; j < g.p; ++j)
            if (i != j) dm.D(i, j) = std::max(0.0, 1.0 - std::fabs(g.W(i, j)));
    return dm;
}

Partition ward_clusters(const DistanceMatrix& dm, int k) {
    const int p = dm.p;
    require(k >= 1 && k <= p, Err::invalid_k,
            "k must be in [1,p], got " + std::to_string(k));

    // Ward merge costs via Lance-Williams on squared dissimilarities.
    Matrix delta(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) delta(i, j) = 0.5 * dm.D(i, j) * dm.D(i, j);

    std::vector<char> active(p, 1);
    std::vector<double> csize(p, 1.0);
    std::vector<int> rep(p);
    std::iota(rep.begin(), rep.end(), 0);

    auto nearest = [&](int i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = -1;
        for (int j = 0; j < p; ++j) {
            if (j == i || !active[j]) continue;
            if (delta(i, j) < best) {
                best = delta(i, j);
                arg = j;
            }
        }
        return std::pair<int, double>(arg, best);
    };

    std::vector<int> nn(p, -1);
    std::vector<double> nnd(p, 0.0);
    for (int i = 0; i < p; ++i) std::tie(nn[i], nnd[i]) = nearest(i);

    for (int merges = 0; merges < p - k; ++merges) {
        int a = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < p; ++i)
            if (active[i] && nn[i] >= 0 && nnd[i] < best) {
                best = nnd[i];
                a = i;
            }
        int b = nn[a];
        if (a > b) std::swap(a, b);

        double sa = csize[a], sb = csize[b], dab = delta(a, b);
        for (int t = 0; t < p; ++t) {
            if (!active[t] || t == a || t == b) continue;
            double st = csize[t];
            double nd = ((sa + st) * delta(a, t) + (sb + st) * delta(b, t) - st * dab) /
                        (sa + sb + st);
            delta(a, t) = nd;
            delta(t, a) = nd;
        }
        active[b] = 0;
        csize[a] = sa + sb;
        for (int i = 0; i < p; ++i)
            if (rep[i] == b) rep[i] = a;

        std::tie(nn[a], nnd[a]) = nearest(a);
        for (int t = 0; t < p; ++t) {
            if (!active[t] || t == a) continue;
            if (nn[t] == a || nn[t] == b) {
                std::tie(nn[t], nnd[t]) = nearest(t);
            } else if (delta(t, a) < nnd[t]) {
                nn[t] = a;
                nnd[t] = delta(t, a);
            }
        }
    }

    Partition out;
    out.p = p;
    out.d = k;
    out.assign.resize(p);
    std::vector<int> label(p, -1);
    int next = 0;
    for (int i = 0; i < p; ++i) {
        if (label[rep[i]] < 0) label[rep[i]] = next++;
        out.assign[i] = label[rep[i]];
    }
    out.validate();
    return out;
}

Matrix spectral_embedding(const FeatureNetwork& g, int k) {
    const int p = g.p;
    require(k >= 1 && k <= p, Err::invalid_k, "embedding dimension out of range");
    Matrix A = g.W.cwiseAbs();
    Matrix L = -A;
    for (int i = 0; i < p; ++i) L(i, i) = A.row(i).sum();
    Eigen::SelfAdjointEigenSolver<Matrix> es(L);
    require(es.info() == Eigen::Success, Err::convergence_failure,
            "Laplacian eigensolver did not converge");
    Matrix emb = es.eigenvectors().leftCols(k);
    for (int i = 0; i < p; ++i) {
        double norm = emb.row(i).norm();
        if (norm > 0.0) emb.row(i) /= norm;
    }
    return emb;
}

namespace {

int count_distinct_rows(const Matrix& m, double tol) {
    std::vector<int> reps;
    for (int i = 0; i < m.rows(); ++i) {
        bool found = false;
        for (int r : reps)
            if ((m.row(i) - m.row(r)).cwiseAbs().maxCoeff() <= tol) {
                found = true;
                break;
            }
        if (!found) reps.push_back(i);
    }
    return static_cast<int>(reps.size());
}

struct KmeansResult {
    std::vector<int> assign;
    double objective = std::numeric_limits<double>::infinity();
};

// Farthest-first seeding, Lloyd iterations, empty clusters reseeded at the
// point farthest from its current centroid.
KmeansResult kmeans_once(const Matrix& X, int k, Rng& rng) {
    const int n = static_cast<int>(X.rows());
    const int dim = static_cast<int>(X.cols());

    Matrix centers(k, dim);
    std::vector<int> chosen;
    chosen.push_back(static_cast<int>(rng.integer(n)));
    centers.row(0) = X.row(chosen[0]);
    Vector mind = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        int far = 0;
        for (int i = 1; i < n; ++i)
            if (mind(i) > mind(far)) far = i;
        chosen.push_back(far);
        centers.row(c) = X.row(far);
        for (int i = 0; i < n; ++i)
            mind(i) = std::min(mind(i), (X.row(i) - centers.row(c)).squaredNorm());
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = (X.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                double dd = (X.row(i) - centers.row(c)).squaredNorm();
                if (dd < bd) {
                    bd = dd;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        std::vector<int> count(k, 0);
        Matrix sums = Matrix::Zero(k, dim);
        for (int i = 0; i < n; ++i) {
            count[assign[i]]++;
            sums.row(assign[i]) += X.row(i);
        }
        for (int c = 0; c < k; ++c) {
            if (count[c] == 0) {
                // farthest point from its assigned centroid
                int far = 0;
                double fd = -1.0;
                for (int i = 0; i < n; ++i) {
                    double dd = (X.row(i) - centers.row(assign[i])).squaredNorm();
                    if (dd > fd) {
                        fd = dd;
                        far = i;
                    }
                }
                centers.row(c) = X.row(far);
                assign[far] = c;
                changed = true;
            } else {
                centers.row(c) = sums.row(c) / count[c];
            }
        }
        if (!changed) break;
    }

    KmeansResult res;
    res.assign = assign;
    res.objective = 0.0;
    for (int i = 0; i < n; ++i) res.objective += (X.row(i) - centers.row(assign[i])).squaredNorm();
    return res;
}

KmeansResult kmeans(const Matrix& X, int k, std::uint64_t seed, int restarts) {
    Rng rng(seed);
    KmeansResult best;
    for (int r = 0; r < restarts; ++r) {
        Rng sub = rng.fork(r);
        KmeansResult cur = kmeans_once(X, k, sub);
        if (cur.objective < best.objective) best = cur;
    }
    return best;
}

}  // namespace

Partition spectral_clusters(const FeatureNetwork& g, int k, std::uint64_t seed) {
    require(k >= 2, Err::invalid_k, "spectral clustering needs k >= 2");
    require(k <= g.p, Err::invalid_k, "k exceeds node count");
    Matrix emb = spectral_embedding(g, k);
    if (count_distinct_rows(emb, 1e-9) < k)
        fail(Err::degenerate_embedding, "embedding has fewer than k distinct rows");
    KmeansResult km = kmeans(emb, k, seed, 20);
    Partition out;
    out.p = g.p;
    out.d = k;
    out.assign = km.assign;
    out.validate();
    return out.canonical();
}

SoftPartition fuzzy_cmeans(const FeatureNetwork& g, int k, const FuzzyOptions& opts) {
    require(k >= 2, Err::invalid_k, "fuzzy c-means needs k >= 2");
    require(k <= g.p, Err::invalid_k, "k exceeds node count");
    require(opts.fuzzifier > 1.0, Err::invalid_k, "fuzzifier must exceed 1");
    const int p = g.p;
    Matrix X = spectral_embedding(g, k);
    if (count_distinct_rows(X, 1e-9) < k)
        fail(Err::degenerate_embedding, "embedding has fewer than k distinct rows");
    const int dim = static_cast<int>(X.cols());
    const double expo = 2.0 / (opts.fuzzifier - 1.0);

    // farthest-first initial centers
    Rng rng(opts.seed);
    Matrix centers(k, dim);
    centers.row(0) = X.row(static_cast<int>(rng.integer(p)));
    Vector mind = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        int far = 0;
        for (int i = 1; i < p; ++i)
            if (mind(i) > mind(far)) far = i;
        centers.row(c) = X.row(far);
        for (int i = 0; i < p; ++i)
            mind(i) = std::min(mind(i), (X.row(i) - centers.row(c)).squaredNorm());
    }

    Matrix U = Matrix::Zero(k, p);
    double delta = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        Matrix Uprev = U;
        for (int i = 0; i < p; ++i) {
            std::vector<double> dist(k);
            std::vector<int> zeros;
            for (int c = 0; c < k; ++c) {
                dist[c] = (X.row(i) - centers.row(c)).norm();
                if (dist[c] == 0.0) zeros.push_back(c);
            }
            if (!zeros.empty()) {
                for (int c = 0; c < k; ++c) U(c, i) = 0.0;
                for (int c : zeros) U(c, i) = 1.0 / zeros.size();
                continue;
            }
            for (int c = 0; c < k; ++c) {
                double denom = 0.0;
                for (int l = 0; l < k; ++l) denom += std::pow(dist[c] / dist[l], expo);
                U(c, i) = 1.0 / denom;
            }
        }
        // column-normalize against accumulated roundoff
        for (int i = 0; i < p; ++i) U.col(i) /= U.col(i).sum();

        delta = (U - Uprev).cwiseAbs().maxCoeff();
        if (delta < opts.tol && iter > 0) {
            SoftPartition out;
            out.p = p;
            out.d = k;
            out.U = U;
            out.validate();
            return out;
        }

        for (int c = 0; c < k; ++c) {
            Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(dim);
            double den = 0.0;
            for (int i = 0; i < p; ++i) {
                double um = std::pow(U(c, i), opts.fuzzifier);
                num += um * X.row(i);
                den += um;
            }
            if (den > 0.0) centers.row(c) = num / den;
        }
    }
    fail(Err::non_convergence,
         "fuzzy c-means did not converge; final delta " + std::to_string(delta));
}

double modularity(const FeatureNetwork& g, const Partition& part) {
    const int p = g.p;
    Matrix A = g.W.cwiseAbs();
    Vector deg = A.rowwise().sum();
    double two_m = deg.sum();
    if (two_m == 0.0) return 0.0;
    double q = 0.0;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (part.assign[i] == part.assign[j]) q += A(i, j) - deg(i) * deg(j) / two_m;
    return q / two_m;
}

namespace {

// One Kernighan-Lin style refinement pass over a proposed bisection: flip the
// best single node repeatedly (each node once), keep the best prefix.
// Returns the modularity gain of the kept prefix (0 if nothing kept).
double refine_bisection(const Matrix& Bg, std::vector<double>& s) {
    const int n = static_cast<int>(s.size());
    double total_gain = 0.0;
    while (true) {
        std::vector<double> q(n, 0.0);
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                if (v != u) q[u] += Bg(u, v) * s[v];

        std::vector<char> moved(n, 0);
        std::vector<int> order;
        std::vector<double> cumulative;
        std::vector<double> state = s;
        double running = 0.0;
        for (int step = 0; step < n; ++step) {
            int best_u = -1;
            double best_gain = -std::numeric_limits<double>::infinity();
            for (int u = 0; u < n; ++u) {
                if (moved[u]) continue;
                double gain = -state[u] * q[u];
                if (gain > best_gain) {
                    best_gain = gain;
                    best_u = u;
                }
            }
            moved[best_u] = 1;
            state[best_u] = -state[best_u];
            for (int v = 0; v < n; ++v)
                if (v != best_u) q[v] += 2.0 * Bg(v, best_u) * state[best_u];
            running += best_gain;
            order.push_back(best_u);
            cumulative.push_back(running);
        }
        int best_prefix = -1;
        double best_val = 1e-12;
        for (int t = 0; t < n; ++t)
            if (cumulative[t] > best_val) {
                best_val = cumulative[t];
                best_prefix = t;
            }
        if (best_prefix < 0) break;
        for (int t = 0; t <= best_prefix; ++t) s[order[t]] = -s[order[t]];
        total_gain += best_val;
    }
    return total_gain;
}

void split_group(const Matrix& A, const Vector& deg, double two_m, const std::vector<int>& group,
                 std::vector<std::vector<int>>& out) {
    const int n = static_cast<int>(group.size());
    if (n == 1) {
        out.push_back(group);
        return;
    }
    // generalized modularity matrix for the subgroup
    Matrix Bg(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            Bg(a, b) = A(group[a], group[b]) - deg(group[a]) * deg(group[b]) / two_m;
    for (int a = 0; a < n; ++a) {
        double rowsum = Bg.row(a).sum();
        Bg(a, a) -= rowsum;
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es(Bg);
    require(es.info() == Eigen::Success, Err::convergence_failure,
            "modularity eigensolver did not converge");
    double lead = es.eigenvalues()(n - 1);
    std::vector<double> s(n, 1.0);
    if (lead > 1e-10) {
        for (int a = 0; a < n; ++a) s[a] = es.eigenvectors()(a, n - 1) >= 0.0 ? 1.0 : -1.0;
    }
    refine_bisection(Bg, s);

    double dq = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) dq += Bg(a, b) * s[a] * s[b];
    dq /= 2.0 * two_m;  // s^T Bg s / (4m), with two_m = 2m

    std::vector<int> pos, neg;
    for (int a = 0; a < n; ++a) (s[a] > 0 ? pos : neg).push_back(group[a]);
    if (dq <= 1e-12 || pos.empty() || neg.empty()) {
        out.push_back(group);
        return;
    }
    split_group(A, deg, two_m, pos, out);
    split_group(A, deg, two_m, neg, out);
}

}  // namespace

Partition community_detect(const FeatureNetwork& g) {
    const int p = g.p;
    Partition out;
    out.p = p;
    Matrix A = g.W.cwiseAbs();
    Vector deg = A.rowwise().sum();
    double two_m = deg.sum();
    if (two_m == 0.0 || p == 1) {
        out.d = 1;
        out.assign.assign(p, 0);
        return out;
    }
    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::vector<int>> groups;
    split_group(A, deg, two_m, all, groups);

    out.d = static_cast<int>(groups.size());
    out.assign.resize(p);
    for (int c = 0; c < out.d; ++c)
        for (int u : groups[c]) out.assign[u] = c;
    out.validate();
    return out.canonical();
}

}  // namespace fnet
