#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lc/core/error.hpp"
#include "lc/core/rng.hpp"

namespace lc::nn {

template <typename T>
struct Mat {
    int rows = 0, cols = 0;
    std::vector<T> v;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(size_t(r) * c, T(0)) {}

    size_t numel() const { return v.size(); }
    T* data() { return v.data(); }
    const T* data() const { return v.data(); }
    T& operator()(int r, int c) { return v[size_t(r) * cols + c]; }
    T operator()(int r, int c) const { return v[size_t(r) * cols + c]; }

    static Mat randn(int r, int c, Rng& rng, T std_dev) {
        Mat m(r, c);
        for (auto& x : m.v) x = T(rng.normal()) * std_dev;
        return m;
    }
    static Mat zeros(int r, int c) { return Mat(r, c); }

    template <typename U>
    Mat<U> cast() const {
        Mat<U> out(rows, cols);
        for (size_t i = 0; i < v.size(); ++i) out.v[i] = U(v[i]);
        return out;
    }
};

template <typename T>
using EMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
Eigen::Map<EMat<T>> emap(Mat<T>& m) {
    return Eigen::Map<EMat<T>>(m.data(), m.rows, m.cols);
}
template <typename T>
Eigen::Map<const EMat<T>> emap(const Mat<T>& m) {
    return Eigen::Map<const EMat<T>>(m.data(), m.rows, m.cols);
}

// dst[c] += sum_rows src(r, c); explicit row-order loops because Eigen's
// colwise().sum() picks alignment-dependent reduction splits, which breaks
// bitwise reproducibility across heap layouts.
template <typename T>
void add_colsum(Mat<T>& dst, const Mat<T>& src) {
    for (int r = 0; r < src.rows; ++r) {
        const T* s = &src.v[size_t(r) * src.cols];
        T* d = dst.data();
        for (int c = 0; c < src.cols; ++c) d[c] += s[c];
    }
}

// dst[c] += sum_rows a(r, c) * b(r, c)
template <typename T>
void add_colsum_prod(Mat<T>& dst, const Mat<T>& a, const Mat<T>& b) {
    for (int r = 0; r < a.rows; ++r) {
        const T* pa = &a.v[size_t(r) * a.cols];
        const T* pb = &b.v[size_t(r) * b.cols];
        T* d = dst.data();
        for (int c = 0; c < a.cols; ++c) d[c] += pa[c] * pb[c];
    }
}

// Reverse-mode tape over dense matrices. Node ids are topologically ordered
// by construction; backward() walks them once in reverse.
template <typename T>
class Tape {
  public:
    using Id = int;

    struct Node {
        Mat<T> val;                // owned value (unused when ext != nullptr)
        const Mat<T>* ext = nullptr;
        Mat<T>* gsink = nullptr;   // external grad accumulator for leaves
        Mat<T> grad;               // lazily sized
        std::vector<Mat<T>> aux;
        std::function<void(Tape&, Id)> back;
    };

    std::vector<Node> nodes;

    const Mat<T>& val(Id id) const {
        const Node& n = nodes[id];
        return n.ext ? *n.ext : n.val;
    }
    Mat<T>& grad(Id id) {
        Node& n = nodes[id];
        if (n.grad.rows == 0) {
            const Mat<T>& v = val(id);
            n.grad = Mat<T>::zeros(v.rows, v.cols);
        }
        return n.grad;
    }

    Id constant(Mat<T> v) {
        nodes.push_back(Node{std::move(v), nullptr, nullptr, {}, {}, nullptr});
        return Id(nodes.size() - 1);
    }

    // Leaf bound to an external parameter; grads accumulate into *gsink.
    Id leaf(const Mat<T>* w, Mat<T>* gsink) {
        nodes.push_back(Node{{}, w, gsink, {}, {}, nullptr});
        return Id(nodes.size() - 1);
    }

    // y = x*w + b (b broadcast over rows; b may be -1 for no bias)
    Id linear(Id x, Id w, Id b) {
        const Mat<T>&xv = val(x), &wv = val(w);
        require(xv.cols == wv.rows, "linear: inner dim mismatch");
        Mat<T> y(xv.rows, wv.cols);
        emap(y).noalias() = emap(xv) * emap(wv);
        if (b >= 0) {
            const Mat<T>& bv = val(b);
            emap(y).rowwise() += emap(bv).row(0);
        }
        return push(std::move(y), [x, w, b](Tape& t, Id self) {
            const Mat<T>& gy = t.grad(self);
            emap(t.grad(x)).noalias() += emap(gy) * emap(t.val(w)).transpose();
            emap(t.grad(w)).noalias() += emap(t.val(x)).transpose() * emap(gy);
            if (b >= 0) add_colsum(t.grad(b), gy);
        });
    }

    Id add(Id a, Id b) {
        const Mat<T>&av = val(a), &bv = val(b);
        require(av.rows == bv.rows && av.cols == bv.cols, "add: shape mismatch");
        Mat<T> y(av.rows, av.cols);
        emap(y) = emap(av) + emap(bv);
        return push(std::move(y), [a, b](Tape& t, Id self) {
            const Mat<T>& gy = t.grad(self);
            emap(t.grad(a)) += emap(gy);
            emap(t.grad(b)) += emap(gy);
        });
    }

    Id add_const(Id x, const Mat<T>& c) {
        const Mat<T>& xv = val(x);
        require(xv.rows == c.rows && xv.cols == c.cols, "add_const: shape mismatch");
        Mat<T> y(xv.rows, xv.cols);
        emap(y) = emap(xv) + emap(c);
        return push(std::move(y), [x](Tape& t, Id self) { emap(t.grad(x)) += emap(t.grad(self)); });
    }

    Id sub_const(Id x, const Mat<T>& c) {
        const Mat<T>& xv = val(x);
        require(xv.rows == c.rows && xv.cols == c.cols, "sub_const: shape mismatch");
        Mat<T> y(xv.rows, xv.cols);
        emap(y) = emap(xv) - emap(c);
        return push(std::move(y), [x](Tape& t, Id self) { emap(t.grad(x)) += emap(t.grad(self)); });
    }

    Id mul_const(Id x, const Mat<T>& c) {
        const Mat<T>& xv = val(x);
        require(xv.rows == c.rows && xv.cols == c.cols, "mul_const: shape mismatch");
        Mat<T> y(xv.rows, xv.cols);
        emap(y) = emap(xv).cwiseProduct(emap(c));
        Mat<T> ckeep = c;
        return push(std::move(y), [x, ckeep](Tape& t, Id self) {
            emap(t.grad(x)) += emap(t.grad(self)).cwiseProduct(emap(ckeep));
        });
    }

    // y = x .* (1 + s) + b, s and b broadcast over rows ([1, C])
    Id modulate(Id x, Id s, Id b) {
        const Mat<T>&xv = val(x), &sv = val(s), &bv = val(b);
        require(sv.rows == 1 && bv.rows == 1 && sv.cols == xv.cols && bv.cols == xv.cols,
                "modulate: bad shapes");
        Mat<T> y(xv.rows, xv.cols);
        auto srow = emap(sv).row(0);
        emap(y) = emap(xv).array().rowwise() * (srow.array() + T(1));
        emap(y).rowwise() += emap(bv).row(0);
        return push(std::move(y), [x, s, b](Tape& t, Id self) {
            const Mat<T>& gy = t.grad(self);
            auto srow = emap(t.val(s)).row(0);
            emap(t.grad(x)).array() += emap(gy).array().rowwise() * (srow.array() + T(1));
            add_colsum_prod(t.grad(s), gy, t.val(x));
            add_colsum(t.grad(b), gy);
        });
    }

    // y = x .* g, g broadcast over rows ([1, C])
    Id scale_rows(Id x, Id g) {
        const Mat<T>&xv = val(x), &gv = val(g);
        require(gv.rows == 1 && gv.cols == xv.cols, "scale_rows: bad shapes");
        Mat<T> y(xv.rows, xv.cols);
        emap(y) = emap(xv).array().rowwise() * emap(gv).row(0).array();
        return push(std::move(y), [x, g](Tape& t, Id self) {
            const Mat<T>& gy = t.grad(self);
            emap(t.grad(x)).array() += emap(gy).array().rowwise() * emap(t.val(g)).row(0).array();
            add_colsum_prod(t.grad(g), gy, t.val(x));
        });
    }

    // Row-wise layer norm without affine terms.
    Id layernorm(Id x, T eps) {
        const Mat<T>& xv = val(x);
        Mat<T> y(xv.rows, xv.cols);
        Mat<T> stats(xv.rows, 2);
        const int C = xv.cols;
        for (int r = 0; r < xv.rows; ++r) {
            const T* row = &xv.v[size_t(r) * C];
            T mu = 0;
            for (int c = 0; c < C; ++c) mu += row[c];
            mu /= T(C);
            T var = 0;
            for (int c = 0; c < C; ++c) {
                T d = row[c] - mu;
                var += d * d;
            }
            var /= T(C);
            T rstd = T(1) / std::sqrt(var + eps);
            stats(r, 0) = mu;
            stats(r, 1) = rstd;
            T* out = &y.v[size_t(r) * C];
            for (int c = 0; c < C; ++c) out[c] = (row[c] - mu) * rstd;
        }
        Id id = push(std::move(y), [x](Tape& t, Id self) {
            const Mat<T>& gy = t.grad(self);
            const Mat<T>& yv = t.val(self);
            const Mat<T>& stats = t.nodes[self].aux[0];
            Mat<T>& gx = t.grad(x);
            const int C = yv.cols;
            for (int r = 0; r < yv.rows; ++r) {
                const T* gyr = &gy.v[size_t(r) * C];
                const T* yr = &yv.v[size_t(r) * C];
                T* gxr = &gx.v[size_t(r) * C];
                T rstd = stats(r, 1);
                T mean_g = 0, mean_gy_y = 0;
                for (int c = 0; c < C; ++c) {
                    mean_g += gyr[c];
                    mean_gy_y += gyr[c] * yr[c];
                }
                mean_g /= T(C);
                mean_gy_y /= T(C);
                for (int c = 0; c < C; ++c)
                    gxr[c] += rstd * (gyr[c] - mean_g - yr[c] * mean_gy_y);
            }
        });
        nodes[id].aux.push_back(std::move(stats));
        return id;
    }

    Id silu(Id x) {
        const Mat<T>& xv = val(x);
        Mat<T> y(xv.rows, xv.cols);
        for (size_t i = 0; i < xv.v.size(); ++i) {
            T s = T(1) / (T(1) + std::exp(-xv.v[i]));
            y.v[i] = xv.v[i] * s;
        }
        return push(std::move(y), [x](Tape& t, Id self) {
            const Mat<T>& gy = t.grad(self);
            const Mat<T>& xv = t.val(x);
            Mat<T>& gx = t.grad(x);
            for (size_t i = 0; i < xv.v.size(); ++i) {
                T s = T(1) / (T(1) + std::exp(-xv.v[i]));
                gx.v[i] += gy.v[i] * s * (T(1) + xv.v[i] * (T(1) - s));
            }
        });
    }

    // Multi-head scaled dot-product attention over the full sequence.
    // q, k, v: [N, heads*D]; softmax probabilities are kept for backward.
    Id attention(Id q, Id k, Id v, int heads) {
        const Mat<T>&qv = val(q), &kv = val(k), &vv = val(v);
        require(qv.cols % heads == 0, "attention: width not divisible by heads");
        require(qv.rows == kv.rows && kv.rows == vv.rows && qv.cols == kv.cols &&
                    kv.cols == vv.cols,
                "attention: shape mismatch");
        const int N = qv.rows, D = qv.cols / heads;
        const T scale = T(1) / std::sqrt(T(D));
        Mat<T> out(N, qv.cols);
        Mat<T> probs(heads * N, N);
        EMat<T> Qh(N, D), Kh(N, D), Vh(N, D), S(N, N);
        for (int h = 0; h < heads; ++h) {
            for (int r = 0; r < N; ++r)
                for (int c = 0; c < D; ++c) {
                    Qh(r, c) = qv(r, h * D + c);
                    Kh(r, c) = kv(r, h * D + c);
                    Vh(r, c) = vv(r, h * D + c);
                }
            S.noalias() = Qh * Kh.transpose() * scale;
            for (int r = 0; r < N; ++r) {
                T mx = S.row(r).maxCoeff();
                T sum = 0;
                for (int c = 0; c < N; ++c) {
                    T e = std::exp(S(r, c) - mx);
                    S(r, c) = e;
                    sum += e;
                }
                S.row(r) /= sum;
            }
            emap(probs).middleRows(h * N, N) = S;
            EMat<T> Oh = S * Vh;
            for (int r = 0; r < N; ++r)
                for (int c = 0; c < D; ++c) out(r, h * D + c) = Oh(r, c);
        }
        Id id = push(std::move(out), [q, k, v, heads](Tape& t, Id self) {
            const Mat<T>&qv = t.val(q), &kv = t.val(k), &vv = t.val(v);
            const Mat<T>& gy = t.grad(self);
            const Mat<T>& probs = t.nodes[self].aux[0];
            const int N = qv.rows, D = qv.cols / heads;
            const T scale = T(1) / std::sqrt(T(D));
            Mat<T>&gq = t.grad(q), &gk = t.grad(k), &gv_ = t.grad(v);
            EMat<T> Qh(N, D), Kh(N, D), Vh(N, D), dOh(N, D);
            for (int h = 0; h < heads; ++h) {
                for (int r = 0; r < N; ++r)
                    for (int c = 0; c < D; ++c) {
                        Qh(r, c) = qv(r, h * D + c);
                        Kh(r, c) = kv(r, h * D + c);
                        Vh(r, c) = vv(r, h * D + c);
                        dOh(r, c) = gy(r, h * D + c);
                    }
                auto P = emap(probs).middleRows(h * N, N);
                EMat<T> dP = dOh * Vh.transpose();
                EMat<T> dVh = P.transpose() * dOh;
                EMat<T> dS(N, N);
                for (int r = 0; r < N; ++r) {
                    T dot = 0;
                    for (int c = 0; c < N; ++c) dot += dP(r, c) * P(r, c);
                    for (int c = 0; c < N; ++c) dS(r, c) = P(r, c) * (dP(r, c) - dot);
                }
                EMat<T> dQh = dS * Kh * scale;
                EMat<T> dKh = dS.transpose() * Qh * scale;
                for (int r = 0; r < N; ++r)
                    for (int c = 0; c < D; ++c) {
                        gq(r, h * D + c) += dQh(r, c);
                        gk(r, h * D + c) += dKh(r, c);
                        gv_(r, h * D + c) += dVh(r, c);
                    }
            }
        });
        nodes[id].aux.push_back(std::move(probs));
        return id;
    }

    Id concat_rows(Id a, Id b) {
        const Mat<T>&av = val(a), &bv = val(b);
        require(av.cols == bv.cols, "concat_rows: column mismatch");
        Mat<T> y(av.rows + bv.rows, av.cols);
        emap(y).topRows(av.rows) = emap(av);
        emap(y).bottomRows(bv.rows) = emap(bv);
        int ar = av.rows;
        return push(std::move(y), [a, b, ar](Tape& t, Id self) {
            const Mat<T>& gy = t.grad(self);
            emap(t.grad(a)) += emap(gy).topRows(ar);
            emap(t.grad(b)) += emap(gy).bottomRows(gy.rows - ar);
        });
    }

    Id slice_rows(Id x, int r0, int r1) {
        const Mat<T>& xv = val(x);
        require(0 <= r0 && r0 < r1 && r1 <= xv.rows, "slice_rows: bad range");
        Mat<T> y(r1 - r0, xv.cols);
        emap(y) = emap(xv).middleRows(r0, r1 - r0);
        return push(std::move(y), [x, r0, r1](Tape& t, Id self) {
            emap(t.grad(x)).middleRows(r0, r1 - r0) += emap(t.grad(self));
        });
    }

    Id slice_cols(Id x, int c0, int c1) {
        const Mat<T>& xv = val(x);
        require(0 <= c0 && c0 < c1 && c1 <= xv.cols, "slice_cols: bad range");
        Mat<T> y(xv.rows, c1 - c0);
        emap(y) = emap(xv).middleCols(c0, c1 - c0);
        return push(std::move(y), [x, c0, c1](Tape& t, Id self) {
            emap(t.grad(x)).middleCols(c0, c1 - c0) += emap(t.grad(self));
        });
    }

    Id concat_cols(const std::vector<Id>& parts) {
        require(!parts.empty(), "concat_cols: empty");
        int rows = val(parts[0]).rows, cols = 0;
        for (Id p : parts) {
            require(val(p).rows == rows, "concat_cols: row mismatch");
            cols += val(p).cols;
        }
        Mat<T> y(rows, cols);
        int off = 0;
        for (Id p : parts) {
            emap(y).middleCols(off, val(p).cols) = emap(val(p));
            off += val(p).cols;
        }
        auto keep = parts;
        return push(std::move(y), [keep](Tape& t, Id self) {
            const Mat<T>& gy = t.grad(self);
            int off = 0;
            for (Id p : keep) {
                int c = t.val(p).cols;
                emap(t.grad(p)) += emap(gy).middleCols(off, c);
                off += c;
            }
        });
    }

    // y = x + b, b broadcast over rows ([1, C])
    Id add_rowvec(Id x, Id b) {
        const Mat<T>&xv = val(x), &bv = val(b);
        require(bv.rows == 1 && bv.cols == xv.cols, "add_rowvec: bad shapes");
        Mat<T> y(xv.rows, xv.cols);
        emap(y) = emap(xv);
        emap(y).rowwise() += emap(bv).row(0);
        return push(std::move(y), [x, b](Tape& t, Id self) {
            const Mat<T>& gy = t.grad(self);
            emap(t.grad(x)) += emap(gy);
            add_colsum(t.grad(b), gy);
        });
    }

    Id square(Id x) {
        const Mat<T>& xv = val(x);
        Mat<T> y(xv.rows, xv.cols);
        emap(y) = emap(xv).cwiseProduct(emap(xv));
        return push(std::move(y), [x](Tape& t, Id self) {
            emap(t.grad(x)) += T(2) * emap(t.grad(self)).cwiseProduct(emap(t.val(x)));
        });
    }

    Id sum_all(Id x) {
        const Mat<T>& xv = val(x);
        Mat<T> y(1, 1);
        // fixed-order accumulation
        T acc = 0;
        for (const T& v : xv.v) acc += v;
        y(0, 0) = acc;
        return push(std::move(y), [x](Tape& t, Id self) {
            T g = t.grad(self)(0, 0);
            Mat<T>& gx = t.grad(x);
            for (auto& v : gx.v) v += g;
        });
    }

    // y = sum_i coeff_i * scalar_i
    Id scalar_combo(const std::vector<std::pair<T, Id>>& terms) {
        Mat<T> y(1, 1);
        for (const auto& [c, id] : terms) {
            require(val(id).numel() == 1, "scalar_combo: non-scalar term");
            y(0, 0) += c * val(id)(0, 0);
        }
        auto keep = terms;
        return push(std::move(y), [keep](Tape& t, Id self) {
            T g = t.grad(self)(0, 0);
            for (const auto& [c, id] : keep) t.grad(id)(0, 0) += c * g;
        });
    }

    void backward(Id loss) {
        require(val(loss).numel() == 1, "backward: loss must be scalar");
        grad(loss)(0, 0) = T(1);
        for (Id i = Id(nodes.size()) - 1; i >= 0; --i) {
            Node& n = nodes[i];
            if (n.back && n.grad.rows > 0) n.back(*this, i);
        }
        for (Node& n : nodes)
            if (n.gsink && n.grad.rows > 0) emap(*n.gsink) += emap(n.grad);
    }

  private:
    Id push(Mat<T> v, std::function<void(Tape&, Id)> back) {
        nodes.push_back(Node{std::move(v), nullptr, nullptr, {}, {}, std::move(back)});
        return Id(nodes.size() - 1);
    }
};

template <typename T>
struct Param {
    std::string name;
    Mat<T> w;
};

template <typename T>
struct ParamSet {
    std::vector<Param<T>> items;

    int add(const std::string& name, int rows, int cols) {
        items.push_back({name, Mat<T>::zeros(rows, cols)});
        return int(items.size()) - 1;
    }
    size_t total_size() const {
        size_t n = 0;
        for (const auto& p : items) n += p.w.numel();
        return n;
    }
    const Param<T>* find(const std::string& name) const {
        for (const auto& p : items)
            if (p.name == name) return &p;
        return nullptr;
    }
    Param<T>* find(const std::string& name) {
        for (auto& p : items)
            if (p.name == name) return &p;
        return nullptr;
    }
    // Matching gradient (or optimizer-moment) buffers, one per param.
    std::vector<Mat<T>> make_buffers() const {
        std::vector<Mat<T>> out;
        out.reserve(items.size());
        for (const auto& p : items) out.push_back(Mat<T>::zeros(p.w.rows, p.w.cols));
        return out;
    }
    template <typename U>
    ParamSet<U> cast() const {
        ParamSet<U> out;
        for (const auto& p : items) out.items.push_back({p.name, p.w.template cast<U>()});
        return out;
    }
};

}  // namespace lc::nn
