#include "callfuse/ml/models.hpp"

#include "callfuse/random.hpp"
#include "callfuse/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <utility>

namespace callfuse::ml {

namespace {

constexpr std::pair<Algorithm, std::string_view> kNames[] = {
    {Algorithm::LogReg, "logreg"},         {Algorithm::GaussianNb, "gaussian-nb"}, {Algorithm::Cart, "cart"},
    {Algorithm::LinReg, "linreg"},         {Algorithm::DnnStd, "dnn-std"},         {Algorithm::DnnEarly, "dnn-early"},
    {Algorithm::LinearSvm, "linear-svm"},  {Algorithm::Knn, "knn"},                {Algorithm::RandomForest, "random-forest"},
};

double sigmoid(double z)
{
    if (z >= 0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

class Constant final : public Classifier {
public:
    explicit Constant(int label) : m_label(label) {}
    int predict(std::span<const double>) const override { return m_label; }

private:
    int m_label;
};

// ---------------------------------------------------------------- linear

class Linear final : public Classifier {
public:
    Linear(std::vector<double> w, double b, double cut) : m_w(std::move(w)), m_b(b), m_cut(cut) {}
    int predict(std::span<const double> row) const override { return dot(m_w, row) + m_b >= m_cut ? 1 : 0; }

private:
    std::vector<double> m_w;
    double m_b;
    double m_cut;
};

std::shared_ptr<Classifier> train_logreg(const ModelConfig& config, const Matrix& x, const Labels& y)
{
    const double lr = config.param("learning_rate");
    const double l2 = config.param("l2");
    const int epochs = static_cast<int>(config.param("epochs"));
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> w(d, 0.0), grad(d);
    double b = 0.0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double err = sigmoid(dot(w, x.row(r)) + b) - y[r];
            auto row = x.row(r);
            for (std::size_t j = 0; j < d; ++j)
                grad[j] += err * row[j];
            grad_b += err;
        }
        for (std::size_t j = 0; j < d; ++j)
            w[j] -= lr * (grad[j] / static_cast<double>(n) + l2 * w[j]);
        b -= lr * grad_b / static_cast<double>(n);
    }
    // sigmoid(z) >= 0.5 exactly when z >= 0
    return std::make_shared<Linear>(std::move(w), b, 0.0);
}

// Solves a * x = rhs in place by Gaussian elimination with partial pivoting.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> rhs)
{
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col]))
                pivot = r;
        }
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        if (std::abs(a[col][col]) < 1e-300)
            continue;
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0)
                continue;
            for (std::size_t c = col; c < n; ++c)
                a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c)
            s -= a[i][c] * out[c];
        out[i] = std::abs(a[i][i]) < 1e-300 ? 0.0 : s / a[i][i];
    }
    return out;
}

std::shared_ptr<Classifier> train_linreg(const ModelConfig& config, const Matrix& x, const Labels& y)
{
    const double ridge = config.param("ridge");
    const std::size_t d = x.cols() + 1;
    std::vector<std::vector<double>> a(d, std::vector<double>(d, 0.0));
    std::vector<double> rhs(d, 0.0);
    std::vector<double> z(d);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        std::copy(row.begin(), row.end(), z.begin());
        z[d - 1] = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j)
                a[i][j] += z[i] * z[j];
            rhs[i] += z[i] * y[r];
        }
    }
    for (std::size_t i = 0; i + 1 < d; ++i)
        a[i][i] += ridge * static_cast<double>(x.rows());
    auto beta = solve(std::move(a), std::move(rhs));
    const double b = beta.back();
    beta.pop_back();
    return std::make_shared<Linear>(std::move(beta), b, 0.5);
}

std::shared_ptr<Classifier> train_svm(const ModelConfig& config, const Matrix& x, const Labels& y)
{
    const double lambda = config.param("lambda");
    const int epochs = static_cast<int>(config.param("epochs"));
    const double eta0 = config.param("learning_rate");
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> w(d, 0.0), grad(d), best_w = w;
    double b = 0.0, best_b = 0.0, best_obj = std::numeric_limits<double>::infinity();

    auto objective = [&](const std::vector<double>& wv, double bv) {
        double hinge = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double s = y[r] == 1 ? 1.0 : -1.0;
            hinge += std::max(0.0, 1.0 - s * (dot(wv, x.row(r)) + bv));
        }
        return 0.5 * lambda * dot(wv, wv) + hinge / static_cast<double>(n);
    };

    for (int epoch = 1; epoch <= epochs; ++epoch) {
        for (std::size_t j = 0; j < d; ++j)
            grad[j] = lambda * w[j];
        double grad_b = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double s = y[r] == 1 ? 1.0 : -1.0;
            if (s * (dot(w, x.row(r)) + b) < 1.0) {
                auto row = x.row(r);
                for (std::size_t j = 0; j < d; ++j)
                    grad[j] -= s * row[j] / static_cast<double>(n);
                grad_b -= s / static_cast<double>(n);
            }
        }
        const double eta = eta0 / std::sqrt(static_cast<double>(epoch));
        for (std::size_t j = 0; j < d; ++j)
            w[j] -= eta * grad[j];
        b -= eta * grad_b;
        const double obj = objective(w, b);
        if (obj < best_obj) {
            best_obj = obj;
            best_w = w;
            best_b = b;
        }
    }
    return std::make_shared<Linear>(std::move(best_w), best_b, 0.0);
}

// ---------------------------------------------------------------- naive Bayes

class GaussianNb final : public Classifier {
public:
    GaussianNb(std::vector<double> log_prior, std::vector<std::vector<double>> mean, std::vector<std::vector<double>> var)
        : m_log_prior(std::move(log_prior)), m_mean(std::move(mean)), m_var(std::move(var))
    {
    }

    int predict(std::span<const double> row) const override
    {
        double score[2];
        for (int c = 0; c < 2; ++c) {
            double s = m_log_prior[c];
            for (std::size_t j = 0; j < row.size(); ++j) {
                const double d = row[j] - m_mean[c][j];
                s -= 0.5 * (std::log(2.0 * std::numbers::pi * m_var[c][j]) + d * d / m_var[c][j]);
            }
            score[c] = s;
        }
        return score[1] > score[0] ? 1 : 0;
    }

private:
    std::vector<double> m_log_prior;
    std::vector<std::vector<double>> m_mean;
    std::vector<std::vector<double>> m_var;
};

std::shared_ptr<Classifier> train_nb(const ModelConfig& config, const Matrix& x, const Labels& y)
{
    const double floor = config.param("var_floor");
    const std::size_t d = x.cols();
    std::vector<double> count(2, 0.0);
    std::vector<std::vector<double>> mean(2, std::vector<double>(d, 0.0)), var = mean;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        count[y[r]] += 1.0;
        for (std::size_t j = 0; j < d; ++j)
            mean[y[r]][j] += x(r, j);
    }
    for (int c = 0; c < 2; ++c)
        for (auto& m : mean[c])
            m /= count[c];
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = x(r, j) - mean[y[r]][j];
            var[y[r]][j] += diff * diff;
        }
    }
    for (int c = 0; c < 2; ++c)
        for (auto& v : var[c])
            v = std::max(v / count[c], floor);
    const double n = static_cast<double>(x.rows());
    return std::make_shared<GaussianNb>(std::vector<double>{std::log(count[0] / n), std::log(count[1] / n)},
                                        std::move(mean), std::move(var));
}

// ---------------------------------------------------------------- trees

struct TreeNode {
    int feature = -1;  ///< -1 for a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
};

class Tree final : public Classifier {
public:
    explicit Tree(std::vector<TreeNode> nodes) : m_nodes(std::move(nodes)) {}

    int predict(std::span<const double> row) const override
    {
        int at = 0;
        while (m_nodes[at].feature >= 0)
            at = row[m_nodes[at].feature] <= m_nodes[at].threshold ? m_nodes[at].left : m_nodes[at].right;
        return m_nodes[at].label;
    }

private:
    std::vector<TreeNode> m_nodes;
};

struct TreeOptions {
    int max_depth = 0;          ///< 0 = unbounded
    std::size_t max_features = 0;  ///< 0 = all
};

class TreeGrower {
public:
    TreeGrower(const Matrix& x, const Labels& y, TreeOptions options, Rng* rng)
        : m_x(x), m_y(y), m_options(options), m_rng(rng)
    {
    }

    std::vector<TreeNode> grow(std::vector<std::size_t> rows)
    {
        m_nodes.clear();
        build(std::move(rows), 0);
        return std::move(m_nodes);
    }

private:
    static double gini(double ones, double n)
    {
        if (n == 0)
            return 0.0;
        const double p = ones / n;
        return 2.0 * p * (1.0 - p);
    }

    int build(std::vector<std::size_t> rows, int depth)
    {
        const int index = static_cast<int>(m_nodes.size());
        m_nodes.emplace_back();
        double ones = 0;
        for (auto r : rows)
            ones += m_y[r];
        const double n = static_cast<double>(rows.size());
        m_nodes[index].label = ones * 2 > n ? 1 : 0;
        if (ones == 0 || ones == n || rows.size() < 2 || (m_options.max_depth > 0 && depth >= m_options.max_depth))
            return index;

        std::vector<std::size_t> features(m_x.cols());
        std::iota(features.begin(), features.end(), 0);
        if (m_options.max_features > 0 && m_options.max_features < features.size()) {
            for (std::size_t i = 0; i < m_options.max_features; ++i)
                std::swap(features[i], features[i + m_rng->below(features.size() - i)]);
            features.resize(m_options.max_features);
            std::sort(features.begin(), features.end());
        }

        const double parent = gini(ones, n);
        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::size_t> order = rows;
        for (auto f : features) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m_x(a, f) < m_x(b, f); });
            double left_ones = 0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                left_ones += m_y[order[i]];
                const double lo = m_x(order[i], f), hi = m_x(order[i + 1], f);
                if (!(lo < hi))
                    continue;
                const double nl = static_cast<double>(i + 1), nr = n - nl;
                const double child = (nl * gini(left_ones, nl) + nr * gini(ones - left_ones, nr)) / n;
                const double gain = parent - child;
                double threshold = lo + (hi - lo) / 2.0;
                if (!(threshold < hi))
                    threshold = lo;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = threshold;
                }
            }
        }
        if (best_feature < 0)
            return index;

        std::vector<std::size_t> left, right;
        for (auto r : rows)
            (m_x(r, best_feature) <= best_threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        m_nodes[index].feature = best_feature;
        m_nodes[index].threshold = best_threshold;
        const int l = build(std::move(left), depth + 1);
        const int r = build(std::move(right), depth + 1);
        m_nodes[index].left = l;
        m_nodes[index].right = r;
        return index;
    }

    const Matrix& m_x;
    const Labels& m_y;
    TreeOptions m_options;
    Rng* m_rng;
    std::vector<TreeNode> m_nodes;
};

std::shared_ptr<Classifier> train_cart(const ModelConfig& config, const Matrix& x, const Labels& y)
{
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), 0);
    TreeGrower grower(x, y, {static_cast<int>(config.param("max_depth")), 0}, nullptr);
    return std::make_shared<Tree>(grower.grow(std::move(rows)));
}

class Forest final : public Classifier {
public:
    explicit Forest(std::vector<Tree> trees) : m_trees(std::move(trees)) {}

    int predict(std::span<const double> row) const override
    {
        std::size_t ones = 0;
        for (const auto& tree : m_trees)
            ones += static_cast<std::size_t>(tree.predict(row));
        return ones * 2 > m_trees.size() ? 1 : 0;
    }

private:
    std::vector<Tree> m_trees;
};

std::shared_ptr<Classifier> train_forest(const ModelConfig& config, const Matrix& x, const Labels& y, std::uint64_t seed)
{
    const auto count = static_cast<std::size_t>(config.param("trees"));
    const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))));
    std::vector<Tree> trees;
    trees.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        Rng rng(mix_seed(seed, t));
        std::vector<std::size_t> rows(x.rows());
        for (auto& r : rows)
            r = rng.below(x.rows());
        TreeGrower grower(x, y, {static_cast<int>(config.param("max_depth")), m}, &rng);
        trees.emplace_back(grower.grow(std::move(rows)));
    }
    return std::make_shared<Forest>(std::move(trees));
}

// ---------------------------------------------------------------- knn

class Knn final : public Classifier {
public:
    Knn(Matrix x, Labels y, std::size_t k) : m_x(std::move(x)), m_y(std::move(y)), m_k(k) {}

    int predict(std::span<const double> row) const override
    {
        const std::size_t n = m_x.rows();
        std::vector<std::pair<double, std::size_t>> dist(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto t = m_x.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < t.size(); ++j) {
                const double d = t[j] - row[j];
                s += d * d;
            }
            dist[i] = {s, i};
        }
        const std::size_t k = std::min(m_k, n);
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        std::size_t ones = 0;
        for (std::size_t i = 0; i < k; ++i)
            ones += static_cast<std::size_t>(m_y[dist[i].second]);
        return ones * 2 > k ? 1 : 0;
    }

private:
    Matrix m_x;
    Labels m_y;
    std::size_t m_k;
};

// ---------------------------------------------------------------- neural network

class Network final : public Classifier {
public:
    explicit Network(std::vector<std::size_t> sizes) : m_sizes(std::move(sizes))
    {
        for (std::size_t l = 0; l + 1 < m_sizes.size(); ++l) {
            m_w.emplace_back(m_sizes[l + 1] * m_sizes[l], 0.0);
            m_b.emplace_back(m_sizes[l + 1], 0.0);
        }
    }

    std::size_t layers() const { return m_w.size(); }

    void init(Rng& rng)
    {
        for (std::size_t l = 0; l < layers(); ++l) {
            const double fan_in = static_cast<double>(m_sizes[l]);
            const double scale = l + 1 < layers() ? std::sqrt(2.0 / fan_in) : std::sqrt(1.0 / fan_in);
            for (auto& w : m_w[l])
                w = rng.normal(0.0, scale);
        }
    }

    /// Fills `acts` with every layer's activations; returns the output probability.
    double forward(std::span<const double> input, std::vector<std::vector<double>>& acts) const
    {
        acts.resize(m_sizes.size());
        acts[0].assign(input.begin(), input.end());
        for (std::size_t l = 0; l < layers(); ++l) {
            const std::size_t in = m_sizes[l], out = m_sizes[l + 1];
            auto& next = acts[l + 1];
            next.assign(out, 0.0);
            for (std::size_t o = 0; o < out; ++o) {
                double z = m_b[l][o];
                const double* w = &m_w[l][o * in];
                for (std::size_t i = 0; i < in; ++i)
                    z += w[i] * acts[l][i];
                next[o] = l + 1 < layers() ? std::max(0.0, z) : sigmoid(z);
            }
        }
        return acts.back()[0];
    }

    int predict(std::span<const double> row) const override
    {
        std::vector<std::vector<double>> acts;
        return forward(row, acts) >= 0.5 ? 1 : 0;
    }

    std::vector<std::vector<double>> m_w;
    std::vector<std::vector<double>> m_b;

private:
    std::vector<std::size_t> m_sizes;
};

struct AdamState {
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
    std::size_t step = 0;
};

double bce(double p, int y)
{
    const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
    return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

TrainedModel train_network(const ModelConfig& config, const Matrix& x, const Labels& y, std::uint64_t seed, bool early)
{
    const auto hidden_layers = static_cast<std::size_t>(config.param("layers"));
    const auto width = static_cast<std::size_t>(config.param("width"));
    const int epochs = static_cast<int>(config.param("epochs"));
    const double lr = config.param("learning_rate");
    const auto batch = static_cast<std::size_t>(config.param("batch"));
    const int patience = early ? static_cast<int>(config.param("patience")) : 0;
    const double min_delta = early ? config.param("min_delta") : 0.0;

    std::vector<std::size_t> sizes{x.cols()};
    for (std::size_t l = 0; l < hidden_layers; ++l)
        sizes.push_back(width);
    sizes.push_back(1);
    auto net = std::make_shared<Network>(sizes);
    Rng rng(seed);
    net->init(rng);

    AdamState adam;
    for (std::size_t l = 0; l < net->layers(); ++l) {
        adam.m_w.emplace_back(net->m_w[l].size(), 0.0);
        adam.m_b.emplace_back(net->m_b[l].size(), 0.0);
    }
    adam.v_w = adam.m_w;
    adam.v_b = adam.m_b;
    auto grad_w = adam.m_w;
    auto grad_b = adam.m_b;

    std::vector<std::size_t> order(x.rows());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> delta(sizes.size());

    TrainedModel model;
    model.algorithm = config.algorithm;
    double best = std::numeric_limits<double>::infinity();
    int waited = 0;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            for (auto& g : grad_w)
                std::fill(g.begin(), g.end(), 0.0);
            for (auto& g : grad_b)
                std::fill(g.begin(), g.end(), 0.0);
            for (std::size_t s = start; s < end; ++s) {
                const std::size_t r = order[s];
                const double p = net->forward(x.row(r), acts);
                delta.back().assign(1, p - y[r]);
                for (std::size_t l = net->layers(); l-- > 0;) {
                    const std::size_t in = sizes[l], out = sizes[l + 1];
                    for (std::size_t o = 0; o < out; ++o) {
                        const double d = delta[l + 1][o];
                        grad_b[l][o] += d;
                        double* g = &grad_w[l][o * in];
                        for (std::size_t i = 0; i < in; ++i)
                            g[i] += d * acts[l][i];
                    }
                    if (l == 0)
                        break;
                    delta[l].assign(in, 0.0);
                    for (std::size_t o = 0; o < out; ++o) {
                        const double d = delta[l + 1][o];
                        const double* w = &net->m_w[l][o * in];
                        for (std::size_t i = 0; i < in; ++i)
                            delta[l][i] += d * w[i];
                    }
                    for (std::size_t i = 0; i < in; ++i)
                        if (acts[l][i] <= 0.0)
                            delta[l][i] = 0.0;
                }
            }
            ++adam.step;
            const double scale = 1.0 / static_cast<double>(end - start);
            const double c1 = 1.0 - std::pow(0.9, static_cast<double>(adam.step));
            const double c2 = 1.0 - std::pow(0.999, static_cast<double>(adam.step));
            auto update = [&](std::vector<double>& param, std::vector<double>& grad, std::vector<double>& m,
                              std::vector<double>& v) {
                for (std::size_t i = 0; i < param.size(); ++i) {
                    const double g = grad[i] * scale;
                    m[i] = 0.9 * m[i] + 0.1 * g;
                    v[i] = 0.999 * v[i] + 0.001 * g * g;
                    param[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + 1e-8);
                }
            };
            for (std::size_t l = 0; l < net->layers(); ++l) {
                update(net->m_w[l], grad_w[l], adam.m_w[l], adam.v_w[l]);
                update(net->m_b[l], grad_b[l], adam.m_b[l], adam.v_b[l]);
            }
        }

        if (early) {
            double loss = 0.0;
            for (std::size_t r = 0; r < x.rows(); ++r)
                loss += bce(net->forward(x.row(r), acts), y[r]);
            loss /= static_cast<double>(x.rows());
            model.loss_trace.push_back(loss);
            if (loss < best - min_delta) {
                best = loss;
                waited = 0;
            } else if (++waited >= patience) {
                break;
            }
        }
    }
    model.classifier = std::move(net);
    return model;
}

}  // namespace

std::string_view to_string(Algorithm algorithm)
{
    for (const auto& [a, name] : kNames)
        if (a == algorithm)
            return name;
    return "?";
}

Algorithm parse_algorithm(std::string_view name)
{
    for (const auto& [a, n] : kNames)
        if (n == name)
            return a;
    throw Error("unknown algorithm '" + std::string(name) + "'");
}

double ModelConfig::param(const std::string& name) const
{
    auto it = params.find(name);
    if (it == params.end())
        throw Error("config " + std::to_string(config_id) + " lacks parameter " + name);
    return it->second;
}

std::string ModelConfig::describe() const
{
    std::string out(to_string(algorithm));
    out += '(';
    bool first = true;
    for (const auto& [name, value] : params) {
        if (!first)
            out += ',';
        first = false;
        out += name + '=' + format_double(value);
    }
    return out + ')';
}

std::vector<ModelConfig> enumerate_configs()
{
    std::vector<ModelConfig> grid;
    auto add = [&](Algorithm a, std::map<std::string, double> params) {
        grid.push_back({static_cast<int>(grid.size()) + 1, a, std::move(params)});
    };
    for (auto [lr, l2] : {std::pair{0.1, 0.0}, {0.1, 0.01}, {0.5, 0.001}})
        add(Algorithm::LogReg, {{"learning_rate", lr}, {"l2", l2}, {"epochs", 300}});
    add(Algorithm::GaussianNb, {{"var_floor", 1e-9}});
    for (int depth : {5, 10, 20, 0})
        add(Algorithm::Cart, {{"max_depth", depth}});
    add(Algorithm::LinReg, {{"ridge", 1e-8}});
    const std::pair<int, int> presets[] = {{1, 8}, {1, 16}, {2, 16}, {2, 32}, {3, 32}};
    for (auto [layers, width] : presets)
        add(Algorithm::DnnStd, {{"layers", layers}, {"width", width}, {"epochs", 100}, {"learning_rate", 0.01}, {"batch", 32}});
    for (auto [layers, width] : presets)
        add(Algorithm::DnnEarly, {{"layers", layers},
                                  {"width", width},
                                  {"epochs", 300},
                                  {"learning_rate", 0.01},
                                  {"batch", 32},
                                  {"patience", 10},
                                  {"min_delta", 1e-4}});
    for (double lambda : {1e-4, 1e-3, 1e-2, 1e-1})
        add(Algorithm::LinearSvm, {{"lambda", lambda}, {"epochs", 300}, {"learning_rate", 0.5}});
    for (int k : {1, 3, 5, 7, 9, 11, 15, 21})
        add(Algorithm::Knn, {{"k", k}});
    for (auto [trees, depth] : {std::pair{10, 5}, {25, 10}, {50, 0}, {100, 10}, {100, 0}})
        add(Algorithm::RandomForest, {{"trees", trees}, {"max_depth", depth}});
    return grid;
}

Labels TrainedModel::predict(const Matrix& x) const
{
    Labels out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r)
        out[r] = classifier->predict(x.row(r));
    return out;
}

TrainedModel train(const ModelConfig& config, const Matrix& x, const Labels& y, std::uint64_t seed,
                   Diagnostics* diagnostics)
{
    if (x.rows() == 0 || x.rows() != y.size())
        throw Error("training data is empty or mislabeled");
    const auto ones = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    if (ones == 0 || ones == y.size()) {
        const int label = ones == 0 ? 0 : 1;
        report(diagnostics, "config " + std::to_string(config.config_id) + ": single-class training data, constant predictor " +
                                std::to_string(label));
        return {config.algorithm, std::make_shared<Constant>(label), {}, true};
    }

    TrainedModel model;
    model.algorithm = config.algorithm;
    switch (config.algorithm) {
    case Algorithm::LogReg:
        model.classifier = train_logreg(config, x, y);
        break;
    case Algorithm::GaussianNb:
        model.classifier = train_nb(config, x, y);
        break;
    case Algorithm::Cart:
        model.classifier = train_cart(config, x, y);
        break;
    case Algorithm::LinReg:
        model.classifier = train_linreg(config, x, y);
        break;
    case Algorithm::DnnStd:
        return train_network(config, x, y, seed, false);
    case Algorithm::DnnEarly:
        return train_network(config, x, y, seed, true);
    case Algorithm::LinearSvm:
        model.classifier = train_svm(config, x, y);
        break;
    case Algorithm::Knn:
        model.classifier = std::make_shared<Knn>(x, y, static_cast<std::size_t>(config.param("k")));
        break;
    case Algorithm::RandomForest:
        model.classifier = train_forest(config, x, y, seed);
        break;
    }
    return model;
}

}  // namespace callfuse::ml
