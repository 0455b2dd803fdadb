#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phs/common.hpp"

namespace phs {

// Two-headed policy/heuristic network. Trunk is either two 2x2 convolutions
// (32 filters, ReLU, no padding) or the identity on the flattened input;
// each head is FC(hidden, ReLU) -> linear. Policy output is a log-softmax
// over the action set, heuristic output is a raw scalar (clipped at 0 at the
// point of use, not here).
enum class TrunkKind : std::uint32_t { Dense = 0, Conv = 1 };

struct ModelConfig {
    std::string domain_tag;  // e.g. "stp3", "stp5", "sokoban10", "witness4"
    int height = 0;
    int width = 0;
    int channels = 0;
    int actions = 0;
    TrunkKind trunk = TrunkKind::Conv;
    int conv_filters = 32;
    int hidden = 128;

    int input_size() const { return height * width * channels; }
    // Flattened trunk output feeding the heads.
    int flat_size() const {
        if (trunk == TrunkKind::Dense) return input_size();
        return (height - 2) * (width - 2) * conv_filters;
    }
    bool operator==(const ModelConfig&) const = default;
};

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    std::int64_t step = 0;
    double step_size = 1e-4;
    double l2 = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One trajectory step: the encoded state, the action taken from it (-1 at
// the solution node, which has no outgoing action), and the remaining
// distance d(n*) - d(n) used as the heuristic target.
struct TrainStep {
    Eigen::VectorXd features;
    int action = -1;
    double remaining = 0.0;
};

struct TrainSample {
    std::vector<TrainStep> trajectory;
    double search_loss = 0.0;  // L of the search that solved the problem
};

enum class MseReduction { Mean, Sum };

class Model {
  public:
    Model() = default;
    explicit Model(const ModelConfig& cfg);  // zero-initialized parameters

    static Model random_init(const ModelConfig& cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    Eigen::VectorXd& params() { return theta_; }
    const Eigen::VectorXd& params() const { return theta_; }
    std::int64_t num_params() const { return theta_.size(); }

    // log action probabilities (sums to 1 in exp) and raw heuristic output.
    void forward(const Eigen::VectorXd& features, Eigen::VectorXd& log_probs,
                 double& h) const;

    // Gradient of search_loss * sum_t -log pi(a_t|s_t) w.r.t. all
    // parameters; the heuristic head receives zero.
    Eigen::VectorXd grad_levin_loss(const TrainSample& sample) const;

    // Gradient of the (mean by default) squared error between the heuristic
    // output and the remaining distance; the policy head receives zero.
    Eigen::VectorXd grad_mse_heuristic(const TrainSample& sample,
                                       MseReduction red = MseReduction::Mean) const;

    // Gradient of sum_t -log pi(a_t|s_t): grad_levin_loss with L = 1.
    Eigen::VectorXd grad_cross_entropy_policy(const TrainSample& sample) const;

    void save(std::ostream& out, const AdamState& adam) const;
    static Model load(std::istream& in, AdamState& adam);
    void save_file(const std::string& path, const AdamState& adam) const;
    static Model load_file(const std::string& path, AdamState& adam);

  private:
    struct Caches;
    void forward_cached(const Eigen::VectorXd& features, Caches& c) const;
    void backward(const Caches& c, const Eigen::VectorXd& dlogits, double dh,
                  Eigen::VectorXd& grad) const;

    ModelConfig cfg_;
    Eigen::VectorXd theta_;

    // Flat-parameter offsets (conv1 W/b, conv2 W/b, then per-head FC W/b and
    // output W/b). Zero-sized for the layers a Dense trunk omits.
    struct Layout {
        std::int64_t c1w = 0, c1b = 0, c2w = 0, c2b = 0;
        std::int64_t pw1 = 0, pb1 = 0, pw2 = 0, pb2 = 0;
        std::int64_t hw1 = 0, hb1 = 0, hw2 = 0, hb2 = 0;
        std::int64_t total = 0;
    };
    Layout lay_;
    void compute_layout();
};

// Sanity-preserving Adam with decoupled-from-nothing classic L2: the l2 term
// is added to the gradient before the moment updates.
void adam_update(Model& model, AdamState& state, const Eigen::VectorXd& grad);

}  // namespace phs
