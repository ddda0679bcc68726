#include "fifth/autoenc.hpp"

#include "fifth/error.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace fifth {

namespace {

std::array<std::pair<int, int>, Autoencoder::kLayers> layer_shapes(const AutoencoderConfig& c)
{
    // (rows, cols) of each weight matrix
    return {{{c.hidden, c.inputs}, {c.code, c.hidden}, {c.hidden, c.code}, {c.inputs, c.hidden}}};
}

double sign(double v)
{
    return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
}

struct Forward {
    Mat x, h1, c, h3, y;
};

}  // namespace

Autoencoder::Autoencoder(const AutoencoderConfig& config) : config_(config)
{
    auto shapes = layer_shapes(config_);
    for (int l = 0; l < kLayers; ++l) {
        w_[l] = Mat::Zero(shapes[l].first, shapes[l].second);
        b_[l] = Vec::Zero(shapes[l].first);
    }
    mean_ = Vec::Zero(config_.inputs);
    scale_ = Vec::Ones(config_.inputs);
}

Autoencoder::Autoencoder(const AutoencoderConfig& config, std::uint64_t seed) : Autoencoder(config)
{
    SplitMix64 rng(seed);
    for (auto& w : w_) {
        double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-limit, limit);
    }
}

Mat Autoencoder::standardize(const Mat& batch) const
{
    if (batch.rows() != config_.inputs) throw std::invalid_argument("input has wrong dimension");
    return (batch.colwise() - mean_).array().colwise() / scale_.array();
}

Vec Autoencoder::encode(const Vec& x) const
{
    Mat s = standardize(x);
    Vec h1 = ((w_[0] * s).colwise() + b_[0]).array().tanh();
    return ((w_[1] * h1).colwise() + b_[1]).array().tanh();
}

Vec Autoencoder::decode(const Vec& code) const
{
    if (code.size() != config_.code) throw std::invalid_argument("code has wrong dimension");
    Vec h3 = (w_[2] * code + b_[2]).array().tanh();
    Vec y = w_[3] * h3 + b_[3];
    return y.cwiseProduct(scale_) + mean_;
}

LossParts Autoencoder::loss(const Mat& batch) const
{
    return evaluate(batch, nullptr);
}

LossParts Autoencoder::gradient(const Mat& batch, Vec& grad) const
{
    return evaluate(batch, &grad);
}

LossParts Autoencoder::evaluate(const Mat& batch, Vec* grad) const
{
    if (batch.cols() == 0) throw std::invalid_argument("empty batch");
    const double n = static_cast<double>(batch.cols());
    const double nf = n * config_.inputs;

    Forward f;
    f.x = standardize(batch);
    f.h1 = ((w_[0] * f.x).colwise() + b_[0]).array().tanh();
    f.c = ((w_[1] * f.h1).colwise() + b_[1]).array().tanh();
    f.h3 = ((w_[2] * f.c).colwise() + b_[2]).array().tanh();
    f.y = (w_[3] * f.h3).colwise() + b_[3];

    LossParts p;
    Mat diff = f.y - f.x;
    p.reconstruction = diff.squaredNorm() / nf;
    p.sparsity = f.c.cwiseAbs().sum() / n;
    for (const auto& w : w_) p.decay += w.squaredNorm();
    p.total = p.reconstruction + config_.sparsity * p.sparsity + config_.decay * p.decay;
    if (!grad) return p;

    std::array<Mat, kLayers> gw;
    std::array<Vec, kLayers> gb;
    Mat dy = diff * (2.0 / nf);
    gw[3] = dy * f.h3.transpose();
    gb[3] = dy.rowwise().sum();
    Mat dz3 = (w_[3].transpose() * dy).array() * (1.0 - f.h3.array().square());
    gw[2] = dz3 * f.c.transpose();
    gb[2] = dz3.rowwise().sum();
    Mat dc = w_[2].transpose() * dz3 + f.c.unaryExpr(&sign) * (config_.sparsity / n);
    Mat dz2 = dc.array() * (1.0 - f.c.array().square());
    gw[1] = dz2 * f.h1.transpose();
    gb[1] = dz2.rowwise().sum();
    Mat dz1 = (w_[1].transpose() * dz2).array() * (1.0 - f.h1.array().square());
    gw[0] = dz1 * f.x.transpose();
    gb[0] = dz1.rowwise().sum();

    grad->resize(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index at = 0;
    for (int l = 0; l < kLayers; ++l) {
        gw[l] += 2.0 * config_.decay * w_[l];
        grad->segment(at, gw[l].size()) = gw[l].reshaped();
        at += gw[l].size();
        grad->segment(at, gb[l].size()) = gb[l];
        at += gb[l].size();
    }
    return p;
}

std::size_t Autoencoder::parameter_count() const
{
    std::size_t n = 0;
    for (int l = 0; l < kLayers; ++l) n += static_cast<std::size_t>(w_[l].size() + b_[l].size());
    return n;
}

Vec Autoencoder::parameters() const
{
    Vec p(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index at = 0;
    for (int l = 0; l < kLayers; ++l) {
        p.segment(at, w_[l].size()) = w_[l].reshaped();
        at += w_[l].size();
        p.segment(at, b_[l].size()) = b_[l];
        at += b_[l].size();
    }
    return p;
}

void Autoencoder::set_parameters(const Vec& p)
{
    if (static_cast<std::size_t>(p.size()) != parameter_count()) throw std::invalid_argument("parameter count mismatch");
    Eigen::Index at = 0;
    for (int l = 0; l < kLayers; ++l) {
        w_[l].reshaped() = p.segment(at, w_[l].size());
        at += w_[l].size();
        b_[l] = p.segment(at, b_[l].size());
        at += b_[l].size();
    }
}

void Autoencoder::set_standardization(Vec mean, Vec scale)
{
    if (mean.size() != config_.inputs || scale.size() != config_.inputs)
        throw std::invalid_argument("standardization has wrong dimension");
    mean_ = std::move(mean);
    scale_ = std::move(scale);
}

void Autoencoder::fit_standardization(const Mat& data)
{
    if (data.rows() != config_.inputs || data.cols() == 0) throw std::invalid_argument("bad standardization data");
    mean_ = data.rowwise().mean();
    Mat centered = data.colwise() - mean_;
    scale_ = (centered.array().square().rowwise().sum() / static_cast<double>(data.cols())).sqrt();
    for (Eigen::Index i = 0; i < scale_.size(); ++i)
        if (!(scale_[i] > 1e-8)) scale_[i] = 1.0;
}

Vec Autoencoder::activity(const Mat& data) const
{
    if (data.cols() == 0) return Vec::Zero(config_.code);
    Mat s = standardize(data);
    Mat h1 = ((w_[0] * s).colwise() + b_[0]).array().tanh();
    Mat c = ((w_[1] * h1).colwise() + b_[1]).array().tanh();
    return c.cwiseAbs().rowwise().mean();
}

int Autoencoder::effective_dim(const Mat& data) const
{
    Vec a = activity(data);
    return static_cast<int>((a.array() > config_.prune).count());
}

std::vector<char> Autoencoder::active_mask() const
{
    std::vector<char> mask(static_cast<std::size_t>(config_.code), 1);
    if (trained_activity_.size() == config_.code)
        for (int i = 0; i < config_.code; ++i) mask[static_cast<std::size_t>(i)] = trained_activity_[i] > config_.prune;
    return mask;
}

bool Autoencoder::operator==(const Autoencoder& o) const
{
    if (parameter_count() != o.parameter_count()) return false;
    return parameters() == o.parameters() && mean_ == o.mean_ && scale_ == o.scale_;
}

TrainReport train(Autoencoder& ae, const Mat& data, const TrainOptions& options)
{
    if (data.cols() == 0) throw std::invalid_argument("empty dataset");
    if (options.fit_standardization) ae.fit_standardization(data);
    TrainReport report;
    report.initial_loss = ae.loss(data).total;
    if (options.epochs <= 0) return report;

    SplitMix64 rng(options.seed);
    const auto& cfg = ae.config();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.cols()));
    std::iota(order.begin(), order.end(), 0);
    Vec params = ae.parameters();
    Vec velocity = Vec::Zero(params.size());
    Vec grad;
    const auto batch = static_cast<std::size_t>(std::max(1, cfg.batch));
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            std::size_t end = std::min(order.size(), start + batch);
            Mat mb(data.rows(), static_cast<Eigen::Index>(end - start));
            for (std::size_t i = start; i < end; ++i) mb.col(static_cast<Eigen::Index>(i - start)) = data.col(order[i]);
            ae.gradient(mb, grad);
            velocity = cfg.momentum * velocity - cfg.learning_rate * grad;
            params += velocity;
            ae.set_parameters(params);
            ++report.batches;
        }
        double total = ae.loss(data).total;
        if (!std::isfinite(total))
            throw NumericError("training diverged at epoch " + std::to_string(epoch) + " (loss not finite)");
        report.trace.push_back(total);
    }
    ae.set_trained_activity(ae.activity(data));
    return report;
}

double gradient_check(const Autoencoder& ae, const Mat& batch, double eps)
{
    Vec analytic;
    ae.gradient(batch, analytic);
    Autoencoder probe = ae;
    Vec p = ae.parameters();
    double worst = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        Vec q = p;
        q[i] = p[i] + eps;
        probe.set_parameters(q);
        double up = probe.loss(batch).total;
        q[i] = p[i] - eps;
        probe.set_parameters(q);
        double down = probe.loss(batch).total;
        double numeric = (up - down) / (2 * eps);
        double denom = std::max(std::abs(analytic[i]) + std::abs(numeric), 1e-6);
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

GradientSurvey survey_gradients(std::size_t configurations, std::uint64_t seed)
{
    SplitMix64 rng(seed);
    GradientSurvey s;
    for (std::size_t i = 0; i < configurations; ++i) {
        AutoencoderConfig cfg;
        cfg.inputs = static_cast<int>(rng.uniform_int(2, 6));
        cfg.hidden = static_cast<int>(rng.uniform_int(2, 6));
        cfg.code = static_cast<int>(rng.uniform_int(1, 4));
        cfg.sparsity = rng.uniform(0.0, 0.2);
        cfg.decay = rng.uniform(0.0, 0.01);
        Autoencoder ae(cfg, rng.next());
        for (int l = 0; l < Autoencoder::kLayers; ++l)
            for (Eigen::Index k = 0; k < ae.bias(l).size(); ++k) ae.bias(l)[k] = rng.uniform(-0.5, 0.5);
        Mat batch(cfg.inputs, static_cast<Eigen::Index>(rng.uniform_int(1, 5)));
        for (Eigen::Index c = 0; c < batch.cols(); ++c)
            for (Eigen::Index r = 0; r < batch.rows(); ++r) batch(r, c) = rng.uniform(-2.0, 2.0);
        s.max_relative_error = std::max(s.max_relative_error, gradient_check(ae, batch));
        ++s.configurations;
    }
    return s;
}

Mat plane_dataset(int dims, int latent, int samples, std::uint64_t seed)
{
    SplitMix64 rng(seed);
    Mat a(dims, latent);
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = rng.uniform(-1.0, 1.0);
    Vec b(dims);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-1.0, 1.0);
    Mat x(dims, samples);
    for (int s = 0; s < samples; ++s) {
        Vec u(latent);
        for (int k = 0; k < latent; ++k) u[k] = rng.uniform(-1.0, 1.0);
        x.col(s) = a * u + b;
    }
    return x;
}

namespace {

void put_array(std::ofstream& out, const double* data, std::size_t n)
{
    static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes a little-endian host");
    std::uint64_t len = n;
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> get_array(std::ifstream& in, std::size_t expected)
{
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || len != expected) throw Error("checkpoint array has unexpected length");
    std::vector<double> v(expected);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(expected * sizeof(double)));
    if (!in) throw Error("checkpoint truncated");
    return v;
}

std::vector<double> to_std(const Vec& v)
{
    return {v.data(), v.data() + v.size()};
}

Vec from_std(const std::vector<double>& v)
{
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_checkpoint(const Autoencoder& ae, const std::filesystem::path& path)
{
    const auto& c = ae.config();
    nlohmann::json header = {
        {"format", "fifth-autoencoder"},
        {"version", 1},
        {"layers", {c.inputs, c.hidden, c.code, c.hidden, c.inputs}},
        {"hyper",
         {{"learning_rate", c.learning_rate},
          {"momentum", c.momentum},
          {"sparsity", c.sparsity},
          {"decay", c.decay},
          {"prune", c.prune},
          {"batch", c.batch}}},
        {"standardization", {{"mean", to_std(ae.feature_mean())}, {"scale", to_std(ae.feature_scale())}}},
        {"activity", to_std(ae.trained_activity())},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << header.dump() << '\n';
    for (int l = 0; l < Autoencoder::kLayers; ++l) {
        put_array(out, ae.weight(l).data(), static_cast<std::size_t>(ae.weight(l).size()));
        put_array(out, ae.bias(l).data(), static_cast<std::size_t>(ae.bias(l).size()));
    }
    if (!out) throw Error("failed writing " + path.string());
}

Autoencoder load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": bad checkpoint header: " + e.what());
    }
    if (h.value("format", "") != "fifth-autoencoder") throw Error(path.string() + ": not an autoencoder checkpoint");
    AutoencoderConfig c;
    auto layers = h.at("layers").get<std::vector<int>>();
    if (layers.size() != 5) throw Error(path.string() + ": expected 5 layer sizes");
    c.inputs = layers[0];
    c.hidden = layers[1];
    c.code = layers[2];
    const auto& hy = h.at("hyper");
    c.learning_rate = hy.at("learning_rate");
    c.momentum = hy.at("momentum");
    c.sparsity = hy.at("sparsity");
    c.decay = hy.at("decay");
    c.prune = hy.at("prune");
    c.batch = hy.at("batch");
    Autoencoder ae(c);
    for (int l = 0; l < Autoencoder::kLayers; ++l) {
        auto w = get_array(in, static_cast<std::size_t>(ae.weight(l).size()));
        ae.weight(l) = Eigen::Map<const Mat>(w.data(), ae.weight(l).rows(), ae.weight(l).cols());
        ae.bias(l) = from_std(get_array(in, static_cast<std::size_t>(ae.bias(l).size())));
    }
    auto mean = h.at("standardization").at("mean").get<std::vector<double>>();
    auto scale = h.at("standardization").at("scale").get<std::vector<double>>();
    if (mean.size() != static_cast<std::size_t>(c.inputs) || scale.size() != mean.size())
        throw Error(path.string() + ": standardization has wrong size");
    ae.set_standardization(from_std(mean), from_std(scale));
    ae.set_trained_activity(from_std(h.at("activity").get<std::vector<double>>()));
    return ae;
}

}  // namespace fifth
