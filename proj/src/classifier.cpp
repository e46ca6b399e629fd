#include "wvfusion/classifier.hpp"

#include "wvfusion/errors.hpp"
#include "wvfusion/random.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace wvfusion {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

constexpr const char* kCheckpointFormat = "wvfusion-checkpoint";
constexpr int kCheckpointVersion = 1;

// Channels arrive in [0, 1]; the network sees them shifted to [-0.5, 0.5].
constexpr double kInputCentre = 0.5;

struct ConvShape {
  int in_c, in_h, in_w;
  int filters, kernel, stride;
  int conv_h, conv_w;
  int pool_h, pool_w;
  std::size_t w_off, b_off;

  int patch() const { return in_c * kernel * kernel; }
  int conv_positions() const { return conv_h * conv_w; }
  int pool_positions() const { return pool_h * pool_w; }
};

struct DenseShape {
  int in, out;
  bool relu;
  std::size_t w_off, b_off;
};

// Layer geometry laid over one flat parameter vector.
class Network {
 public:
  explicit Network(const NetworkConfig& config) {
    config.validate();
    std::size_t off = 0;
    int c = config.input_channels, h = config.input_size, w = config.input_size;
    for (const ConvSpec& spec : config.conv_layers) {
      ConvShape s{};
      s.in_c = c;
      s.in_h = h;
      s.in_w = w;
      s.filters = spec.filters;
      s.kernel = spec.kernel;
      s.stride = spec.stride;
      s.conv_h = (h - spec.kernel) / spec.stride + 1;
      s.conv_w = (w - spec.kernel) / spec.stride + 1;
      s.pool_h = s.conv_h / 2;
      s.pool_w = s.conv_w / 2;
      s.w_off = off;
      off += static_cast<std::size_t>(s.filters) * s.patch();
      s.b_off = off;
      off += static_cast<std::size_t>(s.filters);
      conv_.push_back(s);
      c = s.filters;
      h = s.pool_h;
      w = s.pool_w;
    }
    int in = c * h * w;
    std::vector<int> widths = config.dense_widths;
    widths.push_back(config.num_classes);
    for (std::size_t i = 0; i < widths.size(); ++i) {
      DenseShape d{in, widths[i], i + 1 < widths.size(), 0, 0};
      d.w_off = off;
      off += static_cast<std::size_t>(d.in) * d.out;
      d.b_off = off;
      off += static_cast<std::size_t>(d.out);
      dense_.push_back(d);
      in = d.out;
    }
    count_ = off;
    channels_ = config.input_channels;
    size_ = config.input_size;
  }

  std::size_t parameter_count() const { return count_; }

  void initialize(std::vector<double>& params, std::uint64_t seed) const {
    params.assign(count_, 0.0);
    Rng rng(derive_seed(seed, 0x696e6974 /* init */));
    for (const ConvShape& s : conv_) {
      const double sd = std::sqrt(2.0 / s.patch());
      for (std::size_t i = 0; i < static_cast<std::size_t>(s.filters) * s.patch(); ++i)
        params[s.w_off + i] = rng.normal(0.0, sd);
    }
    for (const DenseShape& d : dense_) {
      // He scaling for hidden layers; the output layer uses a reduced scale so an
      // untrained network starts close to the uniform distribution.
      const double sd = d.relu ? std::sqrt(2.0 / d.in) : 0.1 * std::sqrt(1.0 / d.in);
      for (std::size_t i = 0; i < static_cast<std::size_t>(d.in) * d.out; ++i)
        params[d.w_off + i] = rng.normal(0.0, sd);
    }
  }

  struct ConvCache {
    RowMatrix cols;    // patch x conv positions
    RowMatrix act;     // filters x conv positions, post-ReLU
    std::vector<int> pool_idx;  // argmax conv position per pooled output
    RowMatrix pooled;  // filters x pool positions
    RowMatrix dz;      // backward scratch, filters x conv positions
    RowMatrix dcols;   // backward scratch, patch x conv positions
  };

  struct Cache {
    std::vector<ConvCache> conv;
    std::vector<Eigen::VectorXd> dense_in;   // input of each dense layer
    std::vector<Eigen::VectorXd> dense_out;  // post-activation output of each dense layer
  };

  RowMatrix to_input(const ChannelStack& channels) const {
    if (static_cast<int>(channels.size()) != channels_)
      throw InputError(fmt::format("expected {} channels, got {}", channels_, channels.size()));
    RowMatrix in(channels_, static_cast<Eigen::Index>(size_) * size_);
    for (int c = 0; c < channels_; ++c) {
      const Eigen::MatrixXd& m = channels[static_cast<std::size_t>(c)];
      if (m.rows() != size_ || m.cols() != size_)
        throw InputError(fmt::format("channel {} is {}x{}, expected {}x{}", c, m.rows(), m.cols(), size_, size_));
      for (int y = 0; y < size_; ++y)
        for (int x = 0; x < size_; ++x) in(c, y * size_ + x) = m(y, x) - kInputCentre;
    }
    return in;
  }

  Eigen::VectorXd forward(const double* params, const RowMatrix& input, Cache& cache) const {
    cache.conv.resize(conv_.size());
    cache.dense_in.resize(dense_.size());
    cache.dense_out.resize(dense_.size());
    const RowMatrix* x = &input;
    for (std::size_t l = 0; l < conv_.size(); ++l) {
      const ConvShape& s = conv_[l];
      ConvCache& cc = cache.conv[l];
      im2col(s, *x, cc.cols);
      const ConstMatMap w(params + s.w_off, s.filters, s.patch());
      const ConstVecMap b(params + s.b_off, s.filters);
      cc.act.noalias() = w * cc.cols;
      cc.act.colwise() += b;
      cc.act = cc.act.cwiseMax(0.0);
      max_pool(s, cc);
      x = &cc.pooled;
    }
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x->data(), x->size());
    for (std::size_t l = 0; l < dense_.size(); ++l) {
      const DenseShape& d = dense_[l];
      const ConstMatMap w(params + d.w_off, d.out, d.in);
      const ConstVecMap b(params + d.b_off, d.out);
      cache.dense_in[l] = std::move(v);
      Eigen::VectorXd z = w * cache.dense_in[l] + b;
      if (d.relu) z = z.cwiseMax(0.0);
      cache.dense_out[l] = z;
      v = std::move(z);
    }
    return v;
  }

  // Accumulates d(loss)/d(params) into grad given d(loss)/d(logits).
  void backward(const double* params, Cache& cache, const Eigen::VectorXd& dlogits, double* grad) const {
    Eigen::VectorXd dv = dlogits;
    for (std::size_t l = dense_.size(); l-- > 0;) {
      const DenseShape& d = dense_[l];
      if (d.relu) dv = (cache.dense_out[l].array() > 0.0).select(dv, 0.0);
      MatMap gw(grad + d.w_off, d.out, d.in);
      VecMap gb(grad + d.b_off, d.out);
      gw.noalias() += dv * cache.dense_in[l].transpose();
      gb += dv;
      const ConstMatMap w(params + d.w_off, d.out, d.in);
      dv = w.transpose() * dv;
    }
    if (conv_.empty()) return;
    RowMatrix dpooled = Eigen::Map<const RowMatrix>(dv.data(), conv_.back().filters, conv_.back().pool_positions());
    for (std::size_t l = conv_.size(); l-- > 0;) {
      const ConvShape& s = conv_[l];
      ConvCache& cc = cache.conv[l];
      RowMatrix& dz = cc.dz;
      dz.setZero(s.filters, s.conv_positions());
      for (int f = 0; f < s.filters; ++f) {
        for (int p = 0; p < s.pool_positions(); ++p) {
          const int src = cc.pool_idx[static_cast<std::size_t>(f * s.pool_positions() + p)];
          if (cc.act(f, src) > 0.0) dz(f, src) += dpooled(f, p);
        }
      }
      MatMap gw(grad + s.w_off, s.filters, s.patch());
      VecMap gb(grad + s.b_off, s.filters);
      gw.noalias() += dz * cc.cols.transpose();
      gb += dz.rowwise().sum();
      if (l == 0) break;
      const ConstMatMap w(params + s.w_off, s.filters, s.patch());
      cc.dcols.noalias() = w.transpose() * dz;
      dpooled = col2im(s, cc.dcols);
    }
  }

 private:
  static void im2col(const ConvShape& s, const RowMatrix& in, RowMatrix& cols) {
    cols.resize(s.patch(), s.conv_positions());
    for (int c = 0; c < s.in_c; ++c) {
      const double* src = in.data() + static_cast<std::ptrdiff_t>(c) * s.in_h * s.in_w;
      for (int ky = 0; ky < s.kernel; ++ky) {
        for (int kx = 0; kx < s.kernel; ++kx) {
          double* dst = cols.data() + static_cast<std::ptrdiff_t>((c * s.kernel + ky) * s.kernel + kx) * s.conv_positions();
          for (int oy = 0; oy < s.conv_h; ++oy) {
            const double* row = src + (oy * s.stride + ky) * s.in_w + kx;
            for (int ox = 0; ox < s.conv_w; ++ox) *dst++ = row[ox * s.stride];
          }
        }
      }
    }
  }

  static RowMatrix col2im(const ConvShape& s, const RowMatrix& dcols) {
    RowMatrix din = RowMatrix::Zero(s.in_c, static_cast<Eigen::Index>(s.in_h) * s.in_w);
    for (int c = 0; c < s.in_c; ++c) {
      double* dst = din.data() + static_cast<std::ptrdiff_t>(c) * s.in_h * s.in_w;
      for (int ky = 0; ky < s.kernel; ++ky) {
        for (int kx = 0; kx < s.kernel; ++kx) {
          const double* src = dcols.data() + static_cast<std::ptrdiff_t>((c * s.kernel + ky) * s.kernel + kx) * s.conv_positions();
          for (int oy = 0; oy < s.conv_h; ++oy) {
            double* row = dst + (oy * s.stride + ky) * s.in_w + kx;
            for (int ox = 0; ox < s.conv_w; ++ox) row[ox * s.stride] += *src++;
          }
        }
      }
    }
    return din;
  }

  static void max_pool(const ConvShape& s, ConvCache& cc) {
    cc.pooled.resize(s.filters, s.pool_positions());
    cc.pool_idx.resize(static_cast<std::size_t>(s.filters) * s.pool_positions());
    for (int f = 0; f < s.filters; ++f) {
      for (int py = 0; py < s.pool_h; ++py) {
        for (int px = 0; px < s.pool_w; ++px) {
          int best = (2 * py) * s.conv_w + 2 * px;
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              const int idx = (2 * py + dy) * s.conv_w + 2 * px + dx;
              if (cc.act(f, idx) > cc.act(f, best)) best = idx;
            }
          }
          const int p = py * s.pool_w + px;
          cc.pool_idx[static_cast<std::size_t>(f * s.pool_positions() + p)] = best;
          cc.pooled(f, p) = cc.act(f, best);
        }
      }
    }
  }

  std::vector<ConvShape> conv_;
  std::vector<DenseShape> dense_;
  std::size_t count_ = 0;
  int channels_ = 0;
  int size_ = 0;
};

// `cache` is scratch space reused across calls to avoid reallocating the im2col buffers.
double cross_entropy_step(const Network& net, const double* params, const LabeledInput& sample, double weight,
                          double* grad, int* predicted, Network::Cache& cache) {
  const Eigen::VectorXd z = net.forward(params, net.to_input(sample.channels), cache);
  if (sample.label < 0 || sample.label >= z.size())
    throw InputError(fmt::format("label {} outside [0, {})", sample.label, z.size()));
  const Eigen::VectorXd p = softmax(z);
  if (predicted) {
    Eigen::Index arg = 0;
    z.maxCoeff(&arg);
    *predicted = static_cast<int>(arg);
  }
  // log-sum-exp form of -log p[label]
  const double zmax = z.maxCoeff();
  const double loss = zmax + std::log((z.array() - zmax).exp().sum()) - z[sample.label];
  if (grad) {
    Eigen::VectorXd dz = p;
    dz[sample.label] -= 1.0;
    net.backward(params, cache, dz * weight, grad);
  }
  return loss;
}

}  // namespace

void NetworkConfig::validate() const {
  if (input_channels < 1) throw ConfigError("input_channels", "must be >= 1");
  if (input_size < 1) throw ConfigError("input_size", "must be >= 1");
  if (num_classes < 1) throw ConfigError("num_classes", "must be >= 1");
  int size = input_size;
  for (std::size_t i = 0; i < conv_layers.size(); ++i) {
    const ConvSpec& c = conv_layers[i];
    if (c.filters < 1 || c.kernel < 1 || c.stride < 1)
      throw ConfigError(fmt::format("conv_layers[{}]", i), "filters, kernel and stride must be >= 1");
    if (c.kernel > size)
      throw ConfigError(fmt::format("conv_layers[{}]", i),
                        fmt::format("kernel {} exceeds input size {}", c.kernel, size));
    const int conv = (size - c.kernel) / c.stride + 1;
    if (conv < 2)
      throw ConfigError(fmt::format("conv_layers[{}]", i), "output too small for 2x2 pooling");
    size = conv / 2;
  }
  for (std::size_t i = 0; i < dense_widths.size(); ++i)
    if (dense_widths[i] < 1) throw ConfigError(fmt::format("dense_widths[{}]", i), "must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate", "must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
  if (epochs < 0) throw ConfigError("epochs", "must be >= 0");
}

NetworkConfig NetworkConfig::lenet(int input_channels, int input_size, int num_classes) {
  NetworkConfig c;
  c.input_channels = input_channels;
  c.input_size = input_size;
  c.num_classes = num_classes;
  return c;
}

std::size_t parameter_count(const NetworkConfig& config) { return Network(config).parameter_count(); }

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
  const Eigen::ArrayXd e = (scores.array() - scores.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

TrainedModel build_network(const NetworkConfig& config) {
  const Network net(config);
  TrainedModel model;
  model.config = config;
  net.initialize(model.parameters, config.seed);
  return model;
}

double loss_and_gradient(const NetworkConfig& config, std::span<const double> parameters,
                         std::span<const LabeledInput> samples, std::vector<double>* gradient) {
  const Network net(config);
  if (parameters.size() != net.parameter_count()) throw InputError("parameter vector has the wrong length");
  if (samples.empty()) throw EmptySetError("no samples");
  if (gradient) gradient->assign(parameters.size(), 0.0);
  const double weight = 1.0 / static_cast<double>(samples.size());
  double total = 0.0;
  Network::Cache cache;
  for (const LabeledInput& s : samples)
    total += cross_entropy_step(net, parameters.data(), s, weight, gradient ? gradient->data() : nullptr, nullptr,
                                cache);
  return total * weight;
}

TrainedModel train(TrainedModel model, std::span<const LabeledInput> samples, const NetworkConfig& config) {
  const Network net(config);
  if (model.parameters.size() != net.parameter_count())
    throw InputError("model parameters do not match the training configuration");
  model.config = config;
  if (config.epochs == 0) return model;
  if (samples.empty()) throw EmptySetError("no training samples");

  Rng rng(derive_seed(config.seed, 0x73687566 /* shuf */));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(model.parameters.size());
  Network::Cache cache;
  const int first_epoch = model.training_log.empty() ? 1 : model.training_log.back().epoch + 1;

  for (int e = 0; e < config.epochs; ++e) {
    const int epoch = first_epoch + e;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double weight = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const LabeledInput& s = samples[order[i]];
        int predicted = -1;
        loss_sum += cross_entropy_step(net, model.parameters.data(), s, weight, grad.data(), &predicted, cache);
        if (predicted == s.label) ++correct;
      }
      if (!std::isfinite(loss_sum)) throw DivergenceError(epoch);
      for (std::size_t p = 0; p < grad.size(); ++p) model.parameters[p] -= config.learning_rate * grad[p];
    }
    const double loss = loss_sum / static_cast<double>(samples.size());
    if (!std::isfinite(loss) ||
        !std::all_of(model.parameters.begin(), model.parameters.end(), [](double v) { return std::isfinite(v); }))
      throw DivergenceError(epoch);
    model.training_log.push_back({epoch, loss, static_cast<double>(correct) / static_cast<double>(samples.size())});
  }
  return model;
}

Eigen::VectorXd logits(const TrainedModel& model, const ChannelStack& channels) {
  const Network net(model.config);
  if (model.parameters.size() != net.parameter_count()) throw InputError("parameter vector has the wrong length");
  Network::Cache cache;
  return net.forward(model.parameters.data(), net.to_input(channels), cache);
}

LikelihoodVector predict_likelihood(const TrainedModel& model, const ChannelStack& channels, LikelihoodSource source) {
  return LikelihoodVector(softmax(logits(model, channels)), source);
}

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
  using nlohmann::json;
  const NetworkConfig& c = model.config;
  json conv = json::array();
  for (const ConvSpec& s : c.conv_layers) conv.push_back({{"filters", s.filters}, {"kernel", s.kernel}, {"stride", s.stride}});
  json log = json::array();
  for (const EpochStats& e : model.training_log)
    log.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}});
  const json doc = {
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"config",
       {{"input_channels", c.input_channels},
        {"input_size", c.input_size},
        {"num_classes", c.num_classes},
        {"conv_layers", conv},
        {"dense_widths", c.dense_widths},
        {"learning_rate", c.learning_rate},
        {"batch_size", c.batch_size},
        {"epochs", c.epochs},
        {"seed", c.seed}}},
      {"parameters", model.parameters},
      {"training_log", log},
  };
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write checkpoint " + path.string());
  out << doc.dump() << '\n';
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  using nlohmann::json;
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DatasetError(fmt::format("checkpoint {} is not valid JSON: {}", path.string(), e.what()));
  }
  if (doc.value("format", "") != kCheckpointFormat) throw DatasetError("not a wvfusion checkpoint: " + path.string());
  if (doc.value("version", 0) != kCheckpointVersion)
    throw DatasetError(fmt::format("unsupported checkpoint version {}", doc.value("version", 0)));
  TrainedModel model;
  try {
    const json& c = doc.at("config");
    NetworkConfig& cfg = model.config;
    cfg.input_channels = c.at("input_channels").get<int>();
    cfg.input_size = c.at("input_size").get<int>();
    cfg.num_classes = c.at("num_classes").get<int>();
    cfg.conv_layers.clear();
    for (const json& s : c.at("conv_layers"))
      cfg.conv_layers.push_back({s.at("filters").get<int>(), s.at("kernel").get<int>(), s.at("stride").get<int>()});
    cfg.dense_widths = c.at("dense_widths").get<std::vector<int>>();
    cfg.learning_rate = c.at("learning_rate").get<double>();
    cfg.batch_size = c.at("batch_size").get<int>();
    cfg.epochs = c.at("epochs").get<int>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    model.parameters = doc.at("parameters").get<std::vector<double>>();
    for (const json& e : doc.at("training_log"))
      model.training_log.push_back({e.at("epoch").get<int>(), e.at("loss").get<double>(), e.at("accuracy").get<double>()});
  } catch (const json::exception& e) {
    throw DatasetError(fmt::format("malformed checkpoint {}: {}", path.string(), e.what()));
  }
  if (model.parameters.size() != parameter_count(model.config))
    throw DatasetError("checkpoint parameter count does not match its configuration");
  return model;
}

}  // namespace wvfusion
