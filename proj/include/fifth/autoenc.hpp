#pragma once

// Feedforward autoencoder [F, H, K, H, F] with tanh hidden and code layers,
// a linear output layer, and a sparsity plus weight-decay objective.

#include "fifth/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fifth {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct AutoencoderConfig {
    int inputs = 16;
    int hidden = 24;
    int code = 8;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double sparsity = 0.05;     // weight of mean sum |code|
    double decay = 1e-4;        // weight of sum of squared weights
    double prune = 0.05;        // activity threshold for effective dimensionality
    int batch = 32;
};

struct LossParts {
    double reconstruction = 0;
    double sparsity = 0;
    double decay = 0;
    double total = 0;
};

class Autoencoder {
public:
    static constexpr int kLayers = 4;

    /// Zero weights and biases, identity standardization.
    explicit Autoencoder(const AutoencoderConfig& config = {});
    /// Xavier-uniform weights from `seed`, zero biases.
    Autoencoder(const AutoencoderConfig& config, std::uint64_t seed);

    const AutoencoderConfig& config() const { return config_; }
    AutoencoderConfig& config() { return config_; }
    int inputs() const { return config_.inputs; }
    int code_size() const { return config_.code; }

    /// Raw-space input to code. Throws std::invalid_argument on size mismatch.
    Vec encode(const Vec& x) const;
    /// Code to raw-space output.
    Vec decode(const Vec& code) const;
    Vec reconstruct(const Vec& x) const { return decode(encode(x)); }

    /// Loss of a raw-space batch (one sample per column).
    LossParts loss(const Mat& batch) const;
    /// Loss and its gradient with respect to the flat parameter vector.
    LossParts gradient(const Mat& batch, Vec& grad) const;

    std::size_t parameter_count() const;
    Vec parameters() const;
    void set_parameters(const Vec& p);

    Mat& weight(int layer) { return w_[layer]; }
    const Mat& weight(int layer) const { return w_[layer]; }
    Vec& bias(int layer) { return b_[layer]; }
    const Vec& bias(int layer) const { return b_[layer]; }

    /// Per-feature mean and scale; std below 1e-8 is replaced by 1.
    void fit_standardization(const Mat& data);
    void set_standardization(Vec mean, Vec scale);
    const Vec& feature_mean() const { return mean_; }
    const Vec& feature_scale() const { return scale_; }

    /// Mean |activation| of each code unit over a raw-space dataset.
    Vec activity(const Mat& data) const;
    int effective_dim(const Mat& data) const;

    /// Activity recorded by the last training run; empty before training.
    const Vec& trained_activity() const { return trained_activity_; }
    void set_trained_activity(Vec a) { trained_activity_ = std::move(a); }
    /// Units whose trained activity exceeds the prune threshold; all units
    /// when the encoder has not been trained.
    std::vector<char> active_mask() const;

    bool operator==(const Autoencoder& o) const;

private:
    Mat standardize(const Mat& batch) const;
    LossParts evaluate(const Mat& batch, Vec* grad) const;

    AutoencoderConfig config_;
    std::array<Mat, kLayers> w_;
    std::array<Vec, kLayers> b_;
    Vec mean_, scale_;
    Vec trained_activity_;
};

struct TrainOptions {
    int epochs = 200;
    std::uint64_t seed = 1;
    bool fit_standardization = true;
};

struct TrainReport {
    double initial_loss = 0;
    std::vector<double> trace;  // total loss over the dataset after each epoch
    std::size_t batches = 0;
};

/// Minibatch SGD with momentum. Shuffles come from `seed`. Throws
/// NumericError when the loss stops being finite.
TrainReport train(Autoencoder& ae, const Mat& data, const TrainOptions& options);

/// Largest relative difference between the analytic gradient and central
/// differences with step `eps` over all parameters.
double gradient_check(const Autoencoder& ae, const Mat& batch, double eps = 1e-5);

struct GradientSurvey {
    std::size_t configurations = 0;
    double max_relative_error = 0;
};

/// gradient_check over random small configurations with nonzero sparsity
/// and decay weights.
GradientSurvey survey_gradients(std::size_t configurations, std::uint64_t seed);

/// x = A u + b with u uniform in [-1, 1]^latent, A and b standard normal-ish
/// from `seed`. One sample per column.
Mat plane_dataset(int dims, int latent, int samples, std::uint64_t seed);

/// Checkpoint: one JSON header line, then for every layer the weight matrix
/// and bias vector as uint64 length followed by little-endian float64s.
void save_checkpoint(const Autoencoder& ae, const std::filesystem::path& path);
Autoencoder load_checkpoint(const std::filesystem::path& path);

}  // namespace fifth
