#include "bdrbm/rbm.hpp"

#include <cmath>

#include "bdrbm/errors.hpp"

namespace bdrbm {

namespace {

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
    return x.unaryExpr([](double v) { return sigmoid(v); });
}

Eigen::VectorXd hidden_activation(const RbmParams& p, const Eigen::VectorXd& v) {
    return sigmoid(p.hidden_bias + p.weights.transpose() * v);
}

Eigen::VectorXd visible_activation(const RbmParams& p, const Eigen::VectorXd& h) {
    return sigmoid(p.visible_bias + p.weights * h);
}

void check_visible(const RbmParams& p, const Eigen::VectorXd& v) {
    if (v.size() != p.visible_bias.size())
        throw ValidationError("rbm: visible vector length mismatch");
}

Eigen::VectorXd index_to_visible(std::uint64_t index, int n_v) {
    Eigen::VectorXd v(n_v);
    for (int i = 0; i < n_v; ++i) v[i] = double(index >> (n_v - 1 - i) & 1);
    return v;
}

}  // namespace

RbmParams RbmParams::zeros(int n_v, int n_h) {
    return {Eigen::VectorXd::Zero(n_v), Eigen::VectorXd::Zero(n_h),
            Eigen::MatrixXd::Zero(n_v, n_h)};
}

RbmParams RbmParams::gaussian_init(int n_v, int n_h, double sigma, Rng& rng) {
    RbmParams p = zeros(n_v, n_h);
    for (int i = 0; i < n_v; ++i)
        for (int j = 0; j < n_h; ++j) p.weights(i, j) = sigma * rng.normal();
    return p;
}

Eigen::VectorXd flatten(const RbmParams& params) {
    const int n_v = params.n_visible();
    const int n_h = params.n_hidden();
    Eigen::VectorXd lambda(rbm_param_count(n_v, n_h));
    lambda.head(n_v) = params.visible_bias;
    lambda.segment(n_v, n_h) = params.hidden_bias;
    for (int i = 0; i < n_v; ++i)
        lambda.segment(n_v + n_h + i * n_h, n_h) = params.weights.row(i);
    return lambda;
}

RbmParams unflatten(const Eigen::VectorXd& lambda, int n_v, int n_h) {
    if (lambda.size() != rbm_param_count(n_v, n_h))
        throw ValidationError("unflatten: parameter vector length mismatch");
    RbmParams params = RbmParams::zeros(n_v, n_h);
    params.visible_bias = lambda.head(n_v);
    params.hidden_bias = lambda.segment(n_v, n_h);
    for (int i = 0; i < n_v; ++i)
        params.weights.row(i) = lambda.segment(n_v + n_h + i * n_h, n_h);
    return params;
}

double log_prob_unnormalized(const RbmParams& params, const Eigen::VectorXd& v) {
    check_visible(params, v);
    const Eigen::VectorXd pre = params.hidden_bias + params.weights.transpose() * v;
    double acc = params.visible_bias.dot(v);
    for (int j = 0; j < pre.size(); ++j) acc += softplus(pre[j]);
    return acc;
}

OutcomeDistribution exact_distribution(const RbmParams& params) {
    const int n_v = params.n_visible();
    if (n_v > 16)
        throw CapabilityError(
            "exact_distribution: n_v > 16, enumeration intractable; use sample_visible");
    const std::int64_t dim = std::int64_t{1} << n_v;
    Eigen::VectorXd logp(dim);
#pragma omp parallel for schedule(static) if (dim >= (1 << 10))
    for (std::int64_t idx = 0; idx < dim; ++idx) {
        logp[idx] = log_prob_unnormalized(params, index_to_visible(idx, n_v));
    }
    OutcomeDistribution dist;
    dist.probs = (logp.array() - logp.maxCoeff()).exp();
    dist.probs /= dist.probs.sum();
    return dist;
}

Eigen::VectorXd gibbs_step(const RbmParams& params, const Eigen::VectorXd& v,
                           Rng& rng) {
    check_visible(params, v);
    const Eigen::VectorXd ph = hidden_activation(params, v);
    Eigen::VectorXd h(ph.size());
    for (int j = 0; j < h.size(); ++j) h[j] = rng.bernoulli(ph[j]) ? 1.0 : 0.0;
    const Eigen::VectorXd pv = visible_activation(params, h);
    Eigen::VectorXd v_next(pv.size());
    for (int i = 0; i < v_next.size(); ++i)
        v_next[i] = rng.bernoulli(pv[i]) ? 1.0 : 0.0;
    return v_next;
}

std::vector<Eigen::VectorXd> sample_visible(const RbmParams& params,
                                            int n_samples, int burn_in, int thin,
                                            std::uint64_t rng_seed) {
    if (n_samples < 0) throw ValidationError("sample_visible: n_samples < 0");
    if (thin < 1) thin = 1;
    Rng rng(rng_seed);
    Eigen::VectorXd v(params.n_visible());
    for (int i = 0; i < v.size(); ++i) v[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    for (int s = 0; s < burn_in; ++s) v = gibbs_step(params, v, rng);
    std::vector<Eigen::VectorXd> samples;
    samples.reserve(n_samples);
    while (static_cast<int>(samples.size()) < n_samples) {
        for (int t = 0; t < thin; ++t) v = gibbs_step(params, v, rng);
        samples.push_back(v);
    }
    return samples;
}

RbmParams cd1_update(const RbmParams& params,
                     std::span<const WeightedSample> minibatch,
                     const RbmTrainConfig& config, Rng& rng) {
    if (minibatch.empty()) throw ValidationError("cd1_update: empty minibatch");
    const int n_v = params.n_visible();
    const int n_h = params.n_hidden();

    Eigen::VectorXd pos_b = Eigen::VectorXd::Zero(n_v);
    Eigen::VectorXd pos_c = Eigen::VectorXd::Zero(n_h);
    Eigen::MatrixXd pos_w = Eigen::MatrixXd::Zero(n_v, n_h);
    Eigen::VectorXd neg_b = Eigen::VectorXd::Zero(n_v);
    Eigen::VectorXd neg_c = Eigen::VectorXd::Zero(n_h);
    Eigen::MatrixXd neg_w = Eigen::MatrixXd::Zero(n_v, n_h);
    double total_weight = 0.0;

    for (const auto& sample : minibatch) {
        check_visible(params, sample.v);
        const double w = sample.weight;
        total_weight += w;

        const Eigen::VectorXd ph_data = hidden_activation(params, sample.v);
        pos_b += w * sample.v;
        pos_c += w * ph_data;
        pos_w += w * sample.v * ph_data.transpose();

        // CD-k chain: sampled hidden states, probability-valued visibles.
        Eigen::VectorXd ph = ph_data;
        Eigen::VectorXd v_recon;
        for (int step = 0; step < config.cd_steps; ++step) {
            Eigen::VectorXd h(n_h);
            for (int j = 0; j < n_h; ++j) h[j] = rng.bernoulli(ph[j]) ? 1.0 : 0.0;
            v_recon = visible_activation(params, h);
            ph = hidden_activation(params, v_recon);
        }
        neg_b += w * v_recon;
        neg_c += w * ph;
        neg_w += w * v_recon * ph.transpose();
    }

    const double lr = config.learning_rate;
    RbmParams next = params;
    next.visible_bias += lr / total_weight * (pos_b - neg_b);
    next.hidden_bias += lr / total_weight * (pos_c - neg_c);
    next.weights += lr / total_weight * (pos_w - neg_w);
    next.weights -= lr * config.l2_coeff * params.weights;
    return next;
}

RbmParams train_rbm(const RbmParams& init, const std::vector<WeightedSample>& data,
                    const RbmTrainConfig& config, std::uint64_t rng_seed) {
    if (data.empty()) throw ValidationError("train_rbm: empty dataset");
    Rng rng(rng_seed);
    RbmParams params = init;
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<WeightedSample> batch;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += config.minibatch_size) {
            const std::size_t stop =
                std::min(order.size(), start + config.minibatch_size);
            batch.clear();
            for (std::size_t k = start; k < stop; ++k) batch.push_back(data[order[k]]);
            params = cd1_update(params, batch, config, rng);
        }
    }
    return params;
}

std::vector<WeightedSample> expand_record(const MeasurementRecord& record) {
    const int n = record.basis.n_qubits();
    std::vector<WeightedSample> samples;
    samples.reserve(record.counts.size());
    for (const auto& [bits, count] : record.counts) {
        if (count == 0) continue;
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = bits[i] == '1' ? 1.0 : 0.0;
        samples.push_back({std::move(v), static_cast<double>(count)});
    }
    if (samples.empty()) throw ValidationError("expand_record: record has no counts");
    return samples;
}

}  // namespace bdrbm
