#include "phs/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace phs {

namespace {

constexpr int kKernel = 2;
constexpr char kMagic[4] = {'P', 'H', 'S', 'M'};
constexpr std::uint32_t kVersion = 1;

double log_sum_exp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void get(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ParseError("model checkpoint: truncated stream");
}

void put_vec(std::ostream& out, const Eigen::VectorXd& v) {
    const std::int64_t n = v.size();
    put(out, n);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(n * sizeof(double)));
}

Eigen::VectorXd get_vec(std::istream& in) {
    std::int64_t n = 0;
    get(in, n);
    if (n < 0) throw ParseError("model checkpoint: negative array size");
    Eigen::VectorXd v(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ParseError("model checkpoint: truncated parameter array");
    return v;
}

}  // namespace

void Model::compute_layout() {
    std::int64_t off = 0;
    auto take = [&off](std::int64_t n) {
        const std::int64_t at = off;
        off += n;
        return at;
    };
    const int F = cfg_.conv_filters;
    if (cfg_.trunk == TrunkKind::Conv) {
        if (cfg_.height < 3 || cfg_.width < 3)
            throw ConfigError("conv trunk needs input of at least 3x3");
        lay_.c1w = take(static_cast<std::int64_t>(kKernel) * kKernel * cfg_.channels * F);
        lay_.c1b = take(F);
        lay_.c2w = take(static_cast<std::int64_t>(kKernel) * kKernel * F * F);
        lay_.c2b = take(F);
    }
    const int flat = cfg_.flat_size();
    lay_.pw1 = take(static_cast<std::int64_t>(flat) * cfg_.hidden);
    lay_.pb1 = take(cfg_.hidden);
    lay_.pw2 = take(static_cast<std::int64_t>(cfg_.hidden) * cfg_.actions);
    lay_.pb2 = take(cfg_.actions);
    lay_.hw1 = take(static_cast<std::int64_t>(flat) * cfg_.hidden);
    lay_.hb1 = take(cfg_.hidden);
    lay_.hw2 = take(cfg_.hidden);
    lay_.hb2 = take(1);
    lay_.total = off;
}

Model::Model(const ModelConfig& cfg) : cfg_(cfg) {
    if (cfg.height <= 0 || cfg.width <= 0 || cfg.channels <= 0 || cfg.actions <= 0 ||
        cfg.hidden <= 0)
        throw ConfigError("model config: all dimensions must be positive");
    compute_layout();
    theta_ = Eigen::VectorXd::Zero(lay_.total);
}

Model Model::random_init(const ModelConfig& cfg, std::uint64_t seed) {
    Model m(cfg);
    std::mt19937_64 rng(seed);
    auto fill = [&](std::int64_t off, std::int64_t n, int fan_in) {
        const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-s, s);
        for (std::int64_t i = 0; i < n; ++i) m.theta_[off + i] = dist(rng);
    };
    const int F = cfg.conv_filters;
    const int flat = cfg.flat_size();
    if (cfg.trunk == TrunkKind::Conv) {
        fill(m.lay_.c1w, static_cast<std::int64_t>(kKernel) * kKernel * cfg.channels * F,
             kKernel * kKernel * cfg.channels);
        fill(m.lay_.c2w, static_cast<std::int64_t>(kKernel) * kKernel * F * F,
             kKernel * kKernel * F);
    }
    fill(m.lay_.pw1, static_cast<std::int64_t>(flat) * cfg.hidden, flat);
    fill(m.lay_.pw2, static_cast<std::int64_t>(cfg.hidden) * cfg.actions, cfg.hidden);
    fill(m.lay_.hw1, static_cast<std::int64_t>(flat) * cfg.hidden, flat);
    fill(m.lay_.hw2, cfg.hidden, cfg.hidden);
    return m;
}

// All intermediates of one forward pass, kept for backprop.
struct Model::Caches {
    Eigen::MatrixXd p1, z1, a1;  // conv1 patches / pre-act / post-act
    Eigen::MatrixXd p2, z2, a2;  // conv2
    Eigen::VectorXd flat;
    Eigen::VectorXd zp1, ap1, logits, log_probs;
    Eigen::VectorXd zh1, ah1;
    double h = 0.0;
};

void Model::forward_cached(const Eigen::VectorXd& x, Caches& c) const {
    if (x.size() != cfg_.input_size())
        throw ConfigError("model forward: feature size " + std::to_string(x.size()) +
                          " does not match configured input " +
                          std::to_string(cfg_.input_size()));
    const int H = cfg_.height, W = cfg_.width, C = cfg_.channels, F = cfg_.conv_filters;

    if (cfg_.trunk == TrunkKind::Conv) {
        const int H1 = H - 1, W1 = W - 1;
        c.p1.resize(H1 * W1, kKernel * kKernel * C);
        for (int y = 0; y < H1; ++y)
            for (int xcol = 0; xcol < W1; ++xcol) {
                const int row = y * W1 + xcol;
                int col = 0;
                for (int dy = 0; dy < kKernel; ++dy)
                    for (int dx = 0; dx < kKernel; ++dx)
                        for (int ch = 0; ch < C; ++ch)
                            c.p1(row, col++) = x[((y + dy) * W + (xcol + dx)) * C + ch];
            }
        const Eigen::Map<const Eigen::MatrixXd> w1(theta_.data() + lay_.c1w,
                                                   kKernel * kKernel * C, F);
        const Eigen::Map<const Eigen::VectorXd> b1(theta_.data() + lay_.c1b, F);
        c.z1 = (c.p1 * w1).rowwise() + b1.transpose();
        c.a1 = c.z1.cwiseMax(0.0);

        const int H2 = H - 2, W2 = W - 2;
        c.p2.resize(H2 * W2, kKernel * kKernel * F);
        for (int y = 0; y < H2; ++y)
            for (int xcol = 0; xcol < W2; ++xcol) {
                const int row = y * W2 + xcol;
                int col = 0;
                for (int dy = 0; dy < kKernel; ++dy)
                    for (int dx = 0; dx < kKernel; ++dx)
                        for (int f = 0; f < F; ++f)
                            c.p2(row, col++) = c.a1((y + dy) * W1 + (xcol + dx), f);
            }
        const Eigen::Map<const Eigen::MatrixXd> w2(theta_.data() + lay_.c2w,
                                                   kKernel * kKernel * F, F);
        const Eigen::Map<const Eigen::VectorXd> b2(theta_.data() + lay_.c2b, F);
        c.z2 = (c.p2 * w2).rowwise() + b2.transpose();
        c.a2 = c.z2.cwiseMax(0.0);

        c.flat.resize(H2 * W2 * F);
        for (int r = 0; r < H2 * W2; ++r)
            for (int f = 0; f < F; ++f) c.flat[r * F + f] = c.a2(r, f);
    } else {
        c.flat = x;
    }

    const int flat = cfg_.flat_size();
    const Eigen::Map<const Eigen::MatrixXd> pw1(theta_.data() + lay_.pw1, flat, cfg_.hidden);
    const Eigen::Map<const Eigen::VectorXd> pb1(theta_.data() + lay_.pb1, cfg_.hidden);
    const Eigen::Map<const Eigen::MatrixXd> pw2(theta_.data() + lay_.pw2, cfg_.hidden,
                                                cfg_.actions);
    const Eigen::Map<const Eigen::VectorXd> pb2(theta_.data() + lay_.pb2, cfg_.actions);
    c.zp1 = pw1.transpose() * c.flat + pb1;
    c.ap1 = c.zp1.cwiseMax(0.0);
    c.logits = pw2.transpose() * c.ap1 + pb2;
    c.log_probs = c.logits.array() - log_sum_exp(c.logits);

    const Eigen::Map<const Eigen::MatrixXd> hw1(theta_.data() + lay_.hw1, flat, cfg_.hidden);
    const Eigen::Map<const Eigen::VectorXd> hb1(theta_.data() + lay_.hb1, cfg_.hidden);
    const Eigen::Map<const Eigen::VectorXd> hw2(theta_.data() + lay_.hw2, cfg_.hidden);
    c.zh1 = hw1.transpose() * c.flat + hb1;
    c.ah1 = c.zh1.cwiseMax(0.0);
    c.h = hw2.dot(c.ah1) + theta_[lay_.hb2];
}

void Model::forward(const Eigen::VectorXd& features, Eigen::VectorXd& log_probs,
                    double& h) const {
    Caches c;
    forward_cached(features, c);
    log_probs = c.log_probs;
    h = c.h;
}

void Model::backward(const Caches& c, const Eigen::VectorXd& dlogits, double dh,
                     Eigen::VectorXd& grad) const {
    const int flat = cfg_.flat_size();
    const bool want_policy = dlogits.size() > 0 && dlogits.cwiseAbs().maxCoeff() != 0.0;
    const bool want_heur = dh != 0.0;
    if (!want_policy && !want_heur) return;

    Eigen::VectorXd dflat = Eigen::VectorXd::Zero(flat);

    if (want_policy) {
        const Eigen::Map<const Eigen::MatrixXd> pw1(theta_.data() + lay_.pw1, flat,
                                                    cfg_.hidden);
        const Eigen::Map<const Eigen::MatrixXd> pw2(theta_.data() + lay_.pw2, cfg_.hidden,
                                                    cfg_.actions);
        Eigen::Map<Eigen::MatrixXd> gpw2(grad.data() + lay_.pw2, cfg_.hidden, cfg_.actions);
        Eigen::Map<Eigen::VectorXd> gpb2(grad.data() + lay_.pb2, cfg_.actions);
        gpw2.noalias() += c.ap1 * dlogits.transpose();
        gpb2 += dlogits;
        Eigen::VectorXd dzp1 =
            (pw2 * dlogits).cwiseProduct((c.zp1.array() > 0.0).cast<double>().matrix());
        Eigen::Map<Eigen::MatrixXd> gpw1(grad.data() + lay_.pw1, flat, cfg_.hidden);
        Eigen::Map<Eigen::VectorXd> gpb1(grad.data() + lay_.pb1, cfg_.hidden);
        gpw1.noalias() += c.flat * dzp1.transpose();
        gpb1 += dzp1;
        dflat.noalias() += pw1 * dzp1;
    }
    if (want_heur) {
        const Eigen::Map<const Eigen::MatrixXd> hw1(theta_.data() + lay_.hw1, flat,
                                                    cfg_.hidden);
        const Eigen::Map<const Eigen::VectorXd> hw2(theta_.data() + lay_.hw2, cfg_.hidden);
        Eigen::Map<Eigen::VectorXd> ghw2(grad.data() + lay_.hw2, cfg_.hidden);
        ghw2 += c.ah1 * dh;
        grad[lay_.hb2] += dh;
        Eigen::VectorXd dzh1 =
            (hw2 * dh).cwiseProduct((c.zh1.array() > 0.0).cast<double>().matrix());
        Eigen::Map<Eigen::MatrixXd> ghw1(grad.data() + lay_.hw1, flat, cfg_.hidden);
        Eigen::Map<Eigen::VectorXd> ghb1(grad.data() + lay_.hb1, cfg_.hidden);
        ghw1.noalias() += c.flat * dzh1.transpose();
        ghb1 += dzh1;
        dflat.noalias() += hw1 * dzh1;
    }

    if (cfg_.trunk == TrunkKind::Dense) return;

    const int H = cfg_.height, W = cfg_.width, C = cfg_.channels, F = cfg_.conv_filters;
    const int H1 = H - 1, W1 = W - 1, H2 = H - 2, W2 = W - 2;

    Eigen::MatrixXd da2(H2 * W2, F);
    for (int r = 0; r < H2 * W2; ++r)
        for (int f = 0; f < F; ++f) da2(r, f) = dflat[r * F + f];
    const Eigen::MatrixXd dz2 =
        da2.cwiseProduct((c.z2.array() > 0.0).cast<double>().matrix());

    const Eigen::Map<const Eigen::MatrixXd> w2(theta_.data() + lay_.c2w,
                                               kKernel * kKernel * F, F);
    Eigen::Map<Eigen::MatrixXd> gw2(grad.data() + lay_.c2w, kKernel * kKernel * F, F);
    Eigen::Map<Eigen::VectorXd> gb2(grad.data() + lay_.c2b, F);
    gw2.noalias() += c.p2.transpose() * dz2;
    gb2 += dz2.colwise().sum();

    const Eigen::MatrixXd dp2 = dz2 * w2.transpose();
    Eigen::MatrixXd da1 = Eigen::MatrixXd::Zero(H1 * W1, F);
    for (int y = 0; y < H2; ++y)
        for (int xcol = 0; xcol < W2; ++xcol) {
            const int row = y * W2 + xcol;
            int col = 0;
            for (int dy = 0; dy < kKernel; ++dy)
                for (int dx = 0; dx < kKernel; ++dx)
                    for (int f = 0; f < F; ++f)
                        da1((y + dy) * W1 + (xcol + dx), f) += dp2(row, col++);
        }
    const Eigen::MatrixXd dz1 =
        da1.cwiseProduct((c.z1.array() > 0.0).cast<double>().matrix());
    Eigen::Map<Eigen::MatrixXd> gw1(grad.data() + lay_.c1w, kKernel * kKernel * C, F);
    Eigen::Map<Eigen::VectorXd> gb1(grad.data() + lay_.c1b, F);
    gw1.noalias() += c.p1.transpose() * dz1;
    gb1 += dz1.colwise().sum();
}

Eigen::VectorXd Model::grad_levin_loss(const TrainSample& sample) const {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(lay_.total);
    if (sample.search_loss == 0.0) return grad;
    Caches c;
    for (const TrainStep& step : sample.trajectory) {
        if (step.action < 0) continue;
        if (step.action >= cfg_.actions)
            throw ConfigError("levin loss: action index out of range");
        forward_cached(step.features, c);
        Eigen::VectorXd dlogits = c.log_probs.array().exp();
        dlogits[step.action] -= 1.0;
        dlogits *= sample.search_loss;
        backward(c, dlogits, 0.0, grad);
    }
    return grad;
}

Eigen::VectorXd Model::grad_mse_heuristic(const TrainSample& sample,
                                          MseReduction red) const {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(lay_.total);
    if (sample.trajectory.empty()) return grad;
    const double scale =
        red == MseReduction::Mean ? 1.0 / static_cast<double>(sample.trajectory.size()) : 1.0;
    Caches c;
    const Eigen::VectorXd no_dlogits;
    for (const TrainStep& step : sample.trajectory) {
        forward_cached(step.features, c);
        const double dh = scale * 2.0 * (c.h - step.remaining);
        backward(c, no_dlogits, dh, grad);
    }
    return grad;
}

Eigen::VectorXd Model::grad_cross_entropy_policy(const TrainSample& sample) const {
    TrainSample unit = sample;
    unit.search_loss = 1.0;
    return grad_levin_loss(unit);
}

void adam_update(Model& model, AdamState& state, const Eigen::VectorXd& grad) {
    Eigen::VectorXd& theta = model.params();
    if (grad.size() != theta.size())
        throw ConfigError("adam_update: gradient/parameter shape mismatch");
    if (state.m.size() != theta.size()) {
        state.m = Eigen::VectorXd::Zero(theta.size());
        state.v = Eigen::VectorXd::Zero(theta.size());
    }
    const Eigen::VectorXd g = grad + state.l2 * theta;
    state.step += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const Eigen::VectorXd mhat = state.m / bc1;
    const Eigen::VectorXd vhat = state.v / bc2;
    theta -= state.step_size *
             (mhat.array() / (vhat.array().sqrt() + state.eps)).matrix();
}

void Model::save(std::ostream& out, const AdamState& adam) const {
    out.write(kMagic, sizeof(kMagic));
    put(out, kVersion);
    const std::uint32_t tag_len = static_cast<std::uint32_t>(cfg_.domain_tag.size());
    put(out, tag_len);
    out.write(cfg_.domain_tag.data(), tag_len);
    put(out, cfg_.height);
    put(out, cfg_.width);
    put(out, cfg_.channels);
    put(out, cfg_.actions);
    put(out, static_cast<std::uint32_t>(cfg_.trunk));
    put(out, cfg_.conv_filters);
    put(out, cfg_.hidden);
    put_vec(out, theta_);
    put(out, adam.step);
    put(out, adam.step_size);
    put(out, adam.l2);
    put(out, adam.beta1);
    put(out, adam.beta2);
    put(out, adam.eps);
    put_vec(out, adam.m);
    put_vec(out, adam.v);
}

Model Model::load(std::istream& in, AdamState& adam) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError("model checkpoint: bad magic");
    std::uint32_t version = 0;
    get(in, version);
    if (version != kVersion)
        throw ParseError("model checkpoint: unsupported version " + std::to_string(version));
    ModelConfig cfg;
    std::uint32_t tag_len = 0;
    get(in, tag_len);
    cfg.domain_tag.resize(tag_len);
    in.read(cfg.domain_tag.data(), tag_len);
    get(in, cfg.height);
    get(in, cfg.width);
    get(in, cfg.channels);
    get(in, cfg.actions);
    std::uint32_t trunk = 0;
    get(in, trunk);
    cfg.trunk = static_cast<TrunkKind>(trunk);
    get(in, cfg.conv_filters);
    get(in, cfg.hidden);
    Model m(cfg);
    m.theta_ = get_vec(in);
    if (m.theta_.size() != m.lay_.total)
        throw ParseError("model checkpoint: parameter count mismatch");
    get(in, adam.step);
    get(in, adam.step_size);
    get(in, adam.l2);
    get(in, adam.beta1);
    get(in, adam.beta2);
    get(in, adam.eps);
    adam.m = get_vec(in);
    adam.v = get_vec(in);
    return m;
}

void Model::save_file(const std::string& path, const AdamState& adam) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open checkpoint for writing: " + path);
    save(out, adam);
}

Model Model::load_file(const std::string& path, AdamState& adam) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    return load(in, adam);
}

}  // namespace phs
