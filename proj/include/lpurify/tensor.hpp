#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lpurify/errors.hpp"

namespace lpurify {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << 'x';
        os << s[i];
    }
    os << ']';
    return os.str();
}

struct TensorData {
    Shape shape;
    std::vector<float> value;
    std::vector<float> grad;  // empty until backward touches this tensor
    bool requires_grad = false;
    std::int64_t node = -1;  // index into the recording tape, -1 for leaves

    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), 0.0f);
    }
};

// Dense row-major float tensor with cheap shared-handle copies. Mutating
// accessors are meant for leaves (parameters, attack iterates) only.
class Tensor {
  public:
    Tensor() : d_(std::make_shared<TensorData>()) {}

    Tensor(Shape shape, std::vector<float> value)
        : d_(std::make_shared<TensorData>()) {
        if (shape_numel(shape) != value.size())
            throw ShapeError("tensor data length " + std::to_string(value.size()) +
                             " does not match shape " + shape_str(shape));
        for (float v : value)
            if (!std::isfinite(v))
                throw NumericError("tensor constructed with non-finite value");
        d_->shape = std::move(shape);
        d_->value = std::move(value);
    }

    static Tensor zeros(Shape shape) {
        std::vector<float> v(shape_numel(shape), 0.0f);
        return Tensor(std::move(shape), std::move(v));
    }

    static Tensor full(Shape shape, float fill) {
        std::vector<float> v(shape_numel(shape), fill);
        return Tensor(std::move(shape), std::move(v));
    }

    static Tensor scalar(float v) { return Tensor({1}, {v}); }

    const Shape& shape() const { return d_->shape; }
    std::size_t numel() const { return d_->value.size(); }

    std::size_t rows() const {
        if (d_->shape.size() != 2) throw ShapeError("rows(): tensor is not 2-d");
        return d_->shape[0];
    }
    std::size_t cols() const {
        if (d_->shape.size() != 2) throw ShapeError("cols(): tensor is not 2-d");
        return d_->shape[1];
    }

    std::span<const float> value() const { return d_->value; }
    std::span<float> value_mut() { return d_->value; }

    bool has_grad() const { return !d_->grad.empty(); }
    std::span<const float> grad() const { return d_->grad; }

    float item() const {
        if (numel() != 1)
            throw ShapeError("item(): tensor has " + std::to_string(numel()) +
                             " elements");
        return d_->value[0];
    }

    Tensor& set_requires_grad(bool on) {
        d_->requires_grad = on;
        return *this;
    }
    bool requires_grad() const { return d_->requires_grad; }

    void zero_grad() { d_->grad.clear(); }

    // Value copy with no tape linkage.
    Tensor detach() const { return Tensor(d_->shape, {d_->value.begin(), d_->value.end()}); }

    const std::shared_ptr<TensorData>& data() const { return d_; }

  private:
    std::shared_ptr<TensorData> d_;
};

// Records one thread's computation in execution order; backward replays it
// in exact reverse. A tape is spent after one backward pass.
class Tape {
  public:
    using BackFn = std::function<void(const TensorData& out)>;

    Tape() {
        prev_ = tls_active();
        tls_active() = this;
    }

    ~Tape() { tls_active() = prev_; }

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active() { return tls_active(); }

    std::int64_t record(std::shared_ptr<TensorData> out, BackFn back) {
        nodes_.push_back(Node{std::move(out), std::move(back)});
        return static_cast<std::int64_t>(nodes_.size()) - 1;
    }

    std::size_t size() const { return nodes_.size(); }

    void backward(const Tensor& loss) {
        if (used_)
            throw StateError("tape already consumed by backward; re-record the computation");
        if (loss.numel() != 1)
            throw ShapeError("backward requires a scalar loss, got shape " +
                             shape_str(loss.shape()));
        std::int64_t start = loss.data()->node;
        if (start < 0 || start >= static_cast<std::int64_t>(nodes_.size()) ||
            nodes_[static_cast<std::size_t>(start)].out != loss.data())
            throw StateError("loss tensor is not recorded on this tape");
        used_ = true;
        loss.data()->ensure_grad();
        loss.data()->grad[0] = 1.0f;
        for (std::int64_t i = start; i >= 0; --i) {
            Node& n = nodes_[static_cast<std::size_t>(i)];
            if (!n.out->grad.empty()) n.back(*n.out);
        }
    }

  private:
    struct Node {
        std::shared_ptr<TensorData> out;
        BackFn back;
    };

    static Tape*& tls_active() {
        thread_local Tape* t = nullptr;
        return t;
    }

    std::vector<Node> nodes_;
    bool used_ = false;
    Tape* prev_ = nullptr;
};

namespace op_detail {

inline void check_finite(const char* op, std::span<const float> v) {
    for (float x : v)
        if (!std::isfinite(x))
            throw NumericError(std::string(op) + " produced a non-finite value");
}

// Commits an op result: enforces the finiteness invariant, and records a
// backward closure when a tape is active and a gradient is actually wanted.
template <typename BackFn>
Tensor commit(const char* op, Shape shape, std::vector<float> value,
              std::initializer_list<Tensor> inputs, BackFn&& back) {
    check_finite(op, value);
    Tensor out;
    out.data()->shape = std::move(shape);
    out.data()->value = std::move(value);
    bool wants = false;
    for (const Tensor& t : inputs) wants = wants || t.requires_grad();
    Tape* tape = Tape::active();
    if (tape && wants) {
        out.set_requires_grad(true);
        out.data()->node = tape->record(out.data(), Tape::BackFn(std::forward<BackFn>(back)));
    }
    return out;
}

struct GradSink {
    explicit GradSink(const std::shared_ptr<TensorData>& t) : d(t.get()) {
        if (d->requires_grad) d->ensure_grad();
    }
    void add(std::size_t i, float g) {
        if (d->requires_grad) d->grad[i] += g;
    }
    TensorData* d;
};

// Shapes compatible for a binary op: equal, or one side a single element.
inline void check_broadcast(const char* op, const Tensor& a, const Tensor& b) {
    if (a.numel() == 1 || b.numel() == 1) return;
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()) +
                         " are neither equal nor scalar-broadcastable");
}

}  // namespace op_detail

// ---- elementwise binary -----------------------------------------------------

inline Tensor add(const Tensor& a, const Tensor& b) {
    op_detail::check_broadcast("add", a, b);
    const bool as = a.numel() == 1, bs = b.numel() == 1;
    const std::size_t n = std::max(a.numel(), b.numel());
    std::vector<float> v(n);
    auto av = a.value(), bv = b.value();
    for (std::size_t i = 0; i < n; ++i) v[i] = av[as ? 0 : i] + bv[bs ? 0 : i];
    Shape shape = as ? b.shape() : a.shape();
    auto ad = a.data(), bd = b.data();
    return op_detail::commit(
        "add", std::move(shape), std::move(v), {a, b},
        [ad, bd, as, bs, n](const TensorData& out) {
            op_detail::GradSink ga(ad), gb(bd);
            for (std::size_t i = 0; i < n; ++i) {
                float g = out.grad[i];
                ga.add(as ? 0 : i, g);
                gb.add(bs ? 0 : i, g);
            }
        });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    op_detail::check_broadcast("sub", a, b);
    const bool as = a.numel() == 1, bs = b.numel() == 1;
    const std::size_t n = std::max(a.numel(), b.numel());
    std::vector<float> v(n);
    auto av = a.value(), bv = b.value();
    for (std::size_t i = 0; i < n; ++i) v[i] = av[as ? 0 : i] - bv[bs ? 0 : i];
    Shape shape = as ? b.shape() : a.shape();
    auto ad = a.data(), bd = b.data();
    return op_detail::commit(
        "sub", std::move(shape), std::move(v), {a, b},
        [ad, bd, as, bs, n](const TensorData& out) {
            op_detail::GradSink ga(ad), gb(bd);
            for (std::size_t i = 0; i < n; ++i) {
                float g = out.grad[i];
                ga.add(as ? 0 : i, g);
                gb.add(bs ? 0 : i, -g);
            }
        });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    op_detail::check_broadcast("mul", a, b);
    const bool as = a.numel() == 1, bs = b.numel() == 1;
    const std::size_t n = std::max(a.numel(), b.numel());
    std::vector<float> v(n);
    auto av = a.value(), bv = b.value();
    for (std::size_t i = 0; i < n; ++i) v[i] = av[as ? 0 : i] * bv[bs ? 0 : i];
    Shape shape = as ? b.shape() : a.shape();
    auto ad = a.data(), bd = b.data();
    return op_detail::commit(
        "mul", std::move(shape), std::move(v), {a, b},
        [ad, bd, as, bs, n](const TensorData& out) {
            op_detail::GradSink ga(ad), gb(bd);
            for (std::size_t i = 0; i < n; ++i) {
                float g = out.grad[i];
                ga.add(as ? 0 : i, g * bd->value[bs ? 0 : i]);
                gb.add(bs ? 0 : i, g * ad->value[as ? 0 : i]);
            }
        });
}

inline Tensor scale(const Tensor& a, float c) {
    if (!std::isfinite(c)) throw NumericError("scale by non-finite constant");
    std::vector<float> v(a.numel());
    auto av = a.value();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] * c;
    auto ad = a.data();
    return op_detail::commit("scale", a.shape(), std::move(v), {a},
                             [ad, c](const TensorData& out) {
                                 op_detail::GradSink ga(ad);
                                 for (std::size_t i = 0; i < out.grad.size(); ++i)
                                     ga.add(i, out.grad[i] * c);
                             });
}

// ---- elementwise unary ------------------------------------------------------

inline Tensor relu(const Tensor& a) {
    std::vector<float> v(a.numel());
    auto av = a.value();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] > 0.0f ? av[i] : 0.0f;
    auto ad = a.data();
    return op_detail::commit("relu", a.shape(), std::move(v), {a},
                             [ad](const TensorData& out) {
                                 op_detail::GradSink ga(ad);
                                 for (std::size_t i = 0; i < out.grad.size(); ++i)
                                     if (ad->value[i] > 0.0f) ga.add(i, out.grad[i]);
                             });
}

inline Tensor tanh(const Tensor& a) {
    std::vector<float> v(a.numel());
    auto av = a.value();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(av[i]);
    auto ad = a.data();
    return op_detail::commit("tanh", a.shape(), std::move(v), {a},
                             [ad](const TensorData& out) {
                                 op_detail::GradSink ga(ad);
                                 for (std::size_t i = 0; i < out.grad.size(); ++i) {
                                     float t = out.value[i];
                                     ga.add(i, out.grad[i] * (1.0f - t * t));
                                 }
                             });
}

inline Tensor sigmoid(const Tensor& a) {
    std::vector<float> v(a.numel());
    auto av = a.value();
    for (std::size_t i = 0; i < v.size(); ++i) {
        float x = av[i];
        v[i] = x >= 0.0f ? 1.0f / (1.0f + std::exp(-x))
                         : std::exp(x) / (1.0f + std::exp(x));
    }
    auto ad = a.data();
    return op_detail::commit("sigmoid", a.shape(), std::move(v), {a},
                             [ad](const TensorData& out) {
                                 op_detail::GradSink ga(ad);
                                 for (std::size_t i = 0; i < out.grad.size(); ++i) {
                                     float s = out.value[i];
                                     ga.add(i, out.grad[i] * s * (1.0f - s));
                                 }
                             });
}

inline Tensor exp(const Tensor& a) {
    std::vector<float> v(a.numel());
    auto av = a.value();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(av[i]);
    auto ad = a.data();
    return op_detail::commit("exp", a.shape(), std::move(v), {a},
                             [ad](const TensorData& out) {
                                 op_detail::GradSink ga(ad);
                                 for (std::size_t i = 0; i < out.grad.size(); ++i)
                                     ga.add(i, out.grad[i] * out.value[i]);
                             });
}

inline Tensor log(const Tensor& a) {
    auto av = a.value();
    for (float x : av)
        if (x <= 0.0f) throw DomainError("log of non-positive value");
    std::vector<float> v(a.numel());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::log(av[i]);
    auto ad = a.data();
    return op_detail::commit("log", a.shape(), std::move(v), {a},
                             [ad](const TensorData& out) {
                                 op_detail::GradSink ga(ad);
                                 for (std::size_t i = 0; i < out.grad.size(); ++i)
                                     ga.add(i, out.grad[i] / ad->value[i]);
                             });
}

// Pixel-range projection: clips to [0,1]; gradient is zero where the input
// lies strictly outside the box.
inline Tensor clamp01(const Tensor& a) {
    std::vector<float> v(a.numel());
    auto av = a.value();
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = std::min(1.0f, std::max(0.0f, av[i]));
    auto ad = a.data();
    return op_detail::commit("clamp01", a.shape(), std::move(v), {a},
                             [ad](const TensorData& out) {
                                 op_detail::GradSink ga(ad);
                                 for (std::size_t i = 0; i < out.grad.size(); ++i) {
                                     float x = ad->value[i];
                                     if (x >= 0.0f && x <= 1.0f) ga.add(i, out.grad[i]);
                                 }
                             });
}

// ---- linear algebra ----------------------------------------------------------

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.cols() != b.rows())
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<float> v(m * n, 0.0f);
    const float* av = a.value().data();
    const float* bv = b.value().data();
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = av + i * k;
        float* orow = v.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const float aip = arow[p];
            const float* brow = bv + p * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
        }
    }
    auto ad = a.data(), bd = b.data();
    return op_detail::commit(
        "matmul", Shape{m, n}, std::move(v), {a, b},
        [ad, bd, m, k, n](const TensorData& out) {
            const float* g = out.grad.data();
            if (ad->requires_grad) {
                ad->ensure_grad();
                // a.grad += g . b^T
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t p = 0; p < k; ++p) {
                        float acc = 0.0f;
                        const float* grow = g + i * n;
                        const float* brow = bd->value.data() + p * n;
                        for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                        ad->grad[i * k + p] += acc;
                    }
            }
            if (bd->requires_grad) {
                bd->ensure_grad();
                // b.grad += a^T . g
                for (std::size_t p = 0; p < k; ++p)
                    for (std::size_t i = 0; i < m; ++i) {
                        const float aip = ad->value[i * k + p];
                        const float* grow = g + i * n;
                        float* brow = bd->grad.data() + p * n;
                        for (std::size_t j = 0; j < n; ++j) brow[j] += aip * grow[j];
                    }
            }
        });
}

// ---- reductions / reshaping --------------------------------------------------

inline Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (float x : a.value()) acc += x;
    auto ad = a.data();
    return op_detail::commit("sum", Shape{1}, {static_cast<float>(acc)}, {a},
                             [ad](const TensorData& out) {
                                 op_detail::GradSink ga(ad);
                                 float g = out.grad[0];
                                 for (std::size_t i = 0; i < ad->value.size(); ++i)
                                     ga.add(i, g);
                             });
}

// Tiles a 1xN row into MxN; the backward pass sums gradients over rows.
inline Tensor repeat_rows(const Tensor& row, std::size_t m) {
    if (row.shape().size() != 2 || row.rows() != 1)
        throw ShapeError("repeat_rows expects a 1xN row, got " + shape_str(row.shape()));
    const std::size_t n = row.cols();
    std::vector<float> v(m * n);
    auto rv = row.value();
    for (std::size_t i = 0; i < m; ++i)
        std::copy(rv.begin(), rv.end(), v.begin() + static_cast<std::ptrdiff_t>(i * n));
    auto rd = row.data();
    return op_detail::commit("repeat_rows", Shape{m, n}, std::move(v), {row},
                             [rd, m, n](const TensorData& out) {
                                 op_detail::GradSink gr(rd);
                                 for (std::size_t i = 0; i < m; ++i)
                                     for (std::size_t j = 0; j < n; ++j)
                                         gr.add(j, out.grad[i * n + j]);
                             });
}

inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.rows() != b.rows())
        throw ShapeError("concat_cols: incompatible shapes " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
    const std::size_t m = a.rows(), p = a.cols(), q = b.cols();
    std::vector<float> v(m * (p + q));
    auto av = a.value(), bv = b.value();
    for (std::size_t i = 0; i < m; ++i) {
        std::copy(av.begin() + static_cast<std::ptrdiff_t>(i * p),
                  av.begin() + static_cast<std::ptrdiff_t>((i + 1) * p),
                  v.begin() + static_cast<std::ptrdiff_t>(i * (p + q)));
        std::copy(bv.begin() + static_cast<std::ptrdiff_t>(i * q),
                  bv.begin() + static_cast<std::ptrdiff_t>((i + 1) * q),
                  v.begin() + static_cast<std::ptrdiff_t>(i * (p + q) + p));
    }
    auto ad = a.data(), bd = b.data();
    return op_detail::commit(
        "concat_cols", Shape{m, p + q}, std::move(v), {a, b},
        [ad, bd, m, p, q](const TensorData& out) {
            op_detail::GradSink ga(ad), gb(bd);
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < p; ++j)
                    ga.add(i * p + j, out.grad[i * (p + q) + j]);
                for (std::size_t j = 0; j < q; ++j)
                    gb.add(i * q + j, out.grad[i * (p + q) + p + j]);
            }
        });
}

// ---- losses -------------------------------------------------------------------

// Mean over the batch of -log softmax(logits)[label], max-stabilized.
inline Tensor softmax_cross_entropy(const Tensor& logits,
                                    const std::vector<int>& labels) {
    if (logits.shape().size() != 2)
        throw ShapeError("softmax_cross_entropy expects 2-d logits, got " +
                         shape_str(logits.shape()));
    const std::size_t m = logits.rows(), c = logits.cols();
    if (labels.size() != m)
        throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(m) + " rows");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= c)
            throw IndexError("label " + std::to_string(y) + " outside [0," +
                             std::to_string(c) + ")");
    auto lv = logits.value();
    double total = 0.0;
    std::vector<float> softmax(m * c);
    for (std::size_t i = 0; i < m; ++i) {
        const float* row = lv.data() + i * c;
        float mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) z += std::exp(static_cast<double>(row[j] - mx));
        double lse = static_cast<double>(mx) + std::log(z);
        total += lse - static_cast<double>(row[labels[i]]);
        for (std::size_t j = 0; j < c; ++j)
            softmax[i * c + j] = static_cast<float>(std::exp(static_cast<double>(row[j]) - lse));
    }
    float loss = static_cast<float>(total / static_cast<double>(m));
    auto ld = logits.data();
    return op_detail::commit(
        "softmax_cross_entropy", Shape{1}, {loss}, {logits},
        [ld, labels, softmax = std::move(softmax), m, c](const TensorData& out) {
            op_detail::GradSink gl(ld);
            float g = out.grad[0] / static_cast<float>(m);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < c; ++j) {
                    float p = softmax[i * c + j];
                    float onehot = (static_cast<std::size_t>(labels[i]) == j) ? 1.0f : 0.0f;
                    gl.add(i * c + j, g * (p - onehot));
                }
        });
}

// Sum over elements of 0.5*(exp(logvar) + mu^2 - 1 - logvar): KL of a
// diagonal Gaussian against the standard normal.
inline Tensor gaussian_kl_standard(const Tensor& mu, const Tensor& logvar) {
    if (mu.shape() != logvar.shape())
        throw ShapeError("gaussian_kl_standard: shapes " + shape_str(mu.shape()) +
                         " and " + shape_str(logvar.shape()) + " differ");
    auto mv = mu.value(), lv = logvar.value();
    double acc = 0.0;
    for (std::size_t i = 0; i < mv.size(); ++i)
        acc += 0.5 * (std::exp(static_cast<double>(lv[i])) +
                      static_cast<double>(mv[i]) * mv[i] - 1.0 - lv[i]);
    auto md = mu.data(), ld = logvar.data();
    return op_detail::commit(
        "gaussian_kl_standard", Shape{1}, {static_cast<float>(acc)}, {mu, logvar},
        [md, ld](const TensorData& out) {
            op_detail::GradSink gm(md), gl(ld);
            float g = out.grad[0];
            for (std::size_t i = 0; i < md->value.size(); ++i) {
                gm.add(i, g * md->value[i]);
                gl.add(i, g * 0.5f * (std::exp(ld->value[i]) - 1.0f));
            }
        });
}

// ---- fixed-kernel 2-d convolution ---------------------------------------------

namespace op_detail {

inline std::size_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return static_cast<std::size_t>(i);
}

}  // namespace op_detail

// Normalized Gaussian blur applied per row of an Mx(H*W) tensor, with
// reflect padding. The kernel is a compile-time constant of the op, so the
// backward pass is the exact adjoint (scatter with the same taps).
inline Tensor gaussian_blur(const Tensor& x, std::size_t h, std::size_t w,
                            std::size_t kernel_size, double sigma) {
    if (x.shape().size() != 2 || x.cols() != h * w)
        throw ShapeError("gaussian_blur expects Mx(H*W) input, got " +
                         shape_str(x.shape()));
    if (kernel_size % 2 == 0 || kernel_size < 3)
        throw ConfigError("blur kernel size must be odd and >= 3");
    if (kernel_size > h || kernel_size > w)
        throw ConfigError("blur kernel larger than image");
    if (!(sigma > 0.0)) throw ConfigError("blur sigma must be positive");

    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kernel_size / 2);
    std::vector<float> kernel(kernel_size * kernel_size);
    double ksum = 0.0;
    for (std::ptrdiff_t dy = -half; dy <= half; ++dy)
        for (std::ptrdiff_t dx = -half; dx <= half; ++dx) {
            double val = std::exp(-(static_cast<double>(dy * dy + dx * dx)) /
                                  (2.0 * sigma * sigma));
            kernel[static_cast<std::size_t>((dy + half) * static_cast<std::ptrdiff_t>(kernel_size) +
                                            (dx + half))] = static_cast<float>(val);
            ksum += val;
        }
    for (float& v : kernel) v = static_cast<float>(v / ksum);

    const std::size_t m = x.rows(), hw = h * w;
    std::vector<float> v(m * hw, 0.0f);
    auto xv = x.value();
    for (std::size_t r = 0; r < m; ++r) {
        const float* img = xv.data() + r * hw;
        float* out = v.data() + r * hw;
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t xx = 0; xx < w; ++xx) {
                float acc = 0.0f;
                for (std::ptrdiff_t dy = -half; dy <= half; ++dy)
                    for (std::ptrdiff_t dx = -half; dx <= half; ++dx) {
                        std::size_t sy = op_detail::reflect_index(
                            static_cast<std::ptrdiff_t>(y) + dy, static_cast<std::ptrdiff_t>(h));
                        std::size_t sx = op_detail::reflect_index(
                            static_cast<std::ptrdiff_t>(xx) + dx, static_cast<std::ptrdiff_t>(w));
                        acc += kernel[static_cast<std::size_t>(
                                   (dy + half) * static_cast<std::ptrdiff_t>(kernel_size) + dx + half)] *
                               img[sy * w + sx];
                    }
                out[y * w + xx] = acc;
            }
    }
    auto xd = x.data();
    return op_detail::commit(
        "gaussian_blur", x.shape(), std::move(v), {x},
        [xd, kernel = std::move(kernel), m, h, w, half](const TensorData& out) {
            if (!xd->requires_grad) return;
            xd->ensure_grad();
            const std::size_t hw = h * w;
            const std::size_t ks = static_cast<std::size_t>(2 * half + 1);
            for (std::size_t r = 0; r < m; ++r) {
                const float* g = out.grad.data() + r * hw;
                float* gx = xd->grad.data() + r * hw;
                for (std::size_t y = 0; y < h; ++y)
                    for (std::size_t xx = 0; xx < w; ++xx) {
                        float gv = g[y * w + xx];
                        if (gv == 0.0f) continue;
                        for (std::ptrdiff_t dy = -half; dy <= half; ++dy)
                            for (std::ptrdiff_t dx = -half; dx <= half; ++dx) {
                                std::size_t sy = op_detail::reflect_index(
                                    static_cast<std::ptrdiff_t>(y) + dy,
                                    static_cast<std::ptrdiff_t>(h));
                                std::size_t sx = op_detail::reflect_index(
                                    static_cast<std::ptrdiff_t>(xx) + dx,
                                    static_cast<std::ptrdiff_t>(w));
                                gx[sy * w + sx] +=
                                    kernel[static_cast<std::size_t>(
                                        (dy + half) * static_cast<std::ptrdiff_t>(ks) + dx + half)] *
                                    gv;
                            }
                    }
            }
        });
}

// ---- non-taped helpers ---------------------------------------------------------

inline int argmax_row(std::span<const float> row) {
    int best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = static_cast<int>(j);
    return best;
}

inline double l2_norm(std::span<const float> v) {
    double acc = 0.0;
    for (float x : v) acc += static_cast<double>(x) * x;
    return std::sqrt(acc);
}

inline double l2_distance(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a[i]) - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace lpurify
