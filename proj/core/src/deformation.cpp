#include "splatgaze/deformation.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "splatgaze/common.hpp"

namespace splatgaze {

using nlohmann::json;

int TinyMlp::input_dim() const {
    return layers.empty() ? 0 : static_cast<int>(layers.front().weights.cols());
}

int TinyMlp::output_dim() const {
    return layers.empty() ? 0 : static_cast<int>(layers.back().weights.rows());
}

Eigen::VectorXd TinyMlp::evaluate(const Eigen::VectorXd& x) const {
    if (layers.empty())
        throw InputError("tiny-mlp has no layers");
    if (x.size() != layers.front().weights.cols())
        throw InputError("tiny-mlp input dimension mismatch");
    Eigen::VectorXd h = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        h = layers[l].weights * h + layers[l].bias;
        if (l + 1 < layers.size())
            h = h.cwiseMax(0.0); // ReLU on hidden layers only
    }
    return h;
}

TinyMlp load_tiny_mlp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("mlp weights file not found: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("mlp weights " + path.string() + ": " + e.what());
    }

    TinyMlp mlp;
    if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty())
        throw InputError("mlp weights " + path.string() + ": missing non-empty 'layers' array");
    for (const json& lj : j["layers"]) {
        const int rows = lj.at("rows").get<int>();
        const int cols = lj.at("cols").get<int>();
        if (rows < 1 || cols < 1)
            throw InputError("mlp weights " + path.string() + ": non-positive layer dims");
        const auto& w = lj.at("weights");
        const auto& b = lj.at("bias");
        if (static_cast<int>(w.size()) != rows * cols)
            throw InputError("mlp weights " + path.string() + ": weights size != rows*cols");
        if (static_cast<int>(b.size()) != rows)
            throw InputError("mlp weights " + path.string() + ": bias size != rows");
        TinyMlp::Layer layer;
        layer.weights.resize(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                layer.weights(r, c) = w[r * cols + c].get<double>();
        layer.bias.resize(rows);
        for (int r = 0; r < rows; ++r)
            layer.bias(r) = b[r].get<double>();
        if (!layer.weights.allFinite() || !layer.bias.allFinite())
            throw InputError("mlp weights " + path.string() + ": non-finite entries");
        if (!mlp.layers.empty() && mlp.layers.back().weights.rows() != cols)
            throw InputError("mlp weights " + path.string() + ": layer dimensions do not chain");
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

void save_tiny_mlp(const TinyMlp& mlp, const std::filesystem::path& path) {
    json layers = json::array();
    for (const auto& layer : mlp.layers) {
        json w = json::array();
        for (int r = 0; r < layer.weights.rows(); ++r)
            for (int c = 0; c < layer.weights.cols(); ++c)
                w.push_back(layer.weights(r, c));
        json b = json::array();
        for (int r = 0; r < layer.bias.size(); ++r)
            b.push_back(layer.bias(r));
        layers.push_back({{"rows", layer.weights.rows()},
                          {"cols", layer.weights.cols()},
                          {"weights", std::move(w)},
                          {"bias", std::move(b)}});
    }
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write mlp weights: " + path.string());
    out << json{{"layers", std::move(layers)}}.dump(2) << "\n";
}

DeformationProvider DeformationProvider::zero(int input_dim, int cond_dim, int output_dim) {
    DeformationProvider p;
    p.kind_ = ProviderKind::zero;
    p.input_dim_ = input_dim;
    p.cond_dim_ = cond_dim;
    p.output_dim_ = output_dim;
    return p;
}

DeformationProvider DeformationProvider::constant(Eigen::VectorXd value, int input_dim,
                                                  int cond_dim) {
    DeformationProvider p;
    p.kind_ = ProviderKind::constant;
    p.input_dim_ = input_dim;
    p.cond_dim_ = cond_dim;
    p.output_dim_ = static_cast<int>(value.size());
    p.constant_ = std::move(value);
    return p;
}

DeformationProvider DeformationProvider::radial(RadialParams params, int input_dim,
                                                int cond_dim) {
    if (input_dim < 3)
        throw InputError("radial provider needs at least 3 input components");
    if (params.length_scale <= 0.0)
        throw InputError("radial provider length_scale must be positive");
    DeformationProvider p;
    p.kind_ = ProviderKind::radial_parametric;
    p.input_dim_ = input_dim;
    p.cond_dim_ = cond_dim;
    p.output_dim_ = static_cast<int>(params.amplitude.size());
    p.radial_ = std::move(params);
    return p;
}

DeformationProvider DeformationProvider::mlp(TinyMlp mlp, int input_dim, int cond_dim) {
    if (mlp.input_dim() != input_dim + cond_dim)
        throw InputError("tiny-mlp input dimension does not match input_dim + cond_dim");
    DeformationProvider p;
    p.kind_ = ProviderKind::tiny_mlp;
    p.input_dim_ = input_dim;
    p.cond_dim_ = cond_dim;
    p.output_dim_ = mlp.output_dim();
    p.mlp_ = std::move(mlp);
    return p;
}

Eigen::VectorXd DeformationProvider::evaluate(std::span<const double> input,
                                              std::span<const double> conditioning) const {
    switch (kind_) {
    case ProviderKind::zero:
        return Eigen::VectorXd::Zero(output_dim_);
    case ProviderKind::constant:
        return constant_;
    case ProviderKind::radial_parametric: {
        const Vec3 p(input[0], input[1], input[2]);
        const double r2 = (p - radial_.center).squaredNorm();
        const double bump = std::exp(-r2 / (2.0 * radial_.length_scale * radial_.length_scale));
        double cond_sum = 0.0;
        for (double c : conditioning)
            cond_sum += c;
        return radial_.amplitude * (bump * (radial_.bias + radial_.cond_gain * cond_sum));
    }
    case ProviderKind::tiny_mlp: {
        Eigen::VectorXd x(input_dim_ + cond_dim_);
        for (int i = 0; i < input_dim_; ++i)
            x[i] = input[i];
        for (int i = 0; i < cond_dim_; ++i)
            x[input_dim_ + i] = conditioning[i];
        return mlp_.evaluate(x);
    }
    }
    throw ComputeError("unreachable provider kind");
}

Eigen::VectorXd eval_provider(const DeformationProvider& p, std::span<const double> input,
                              std::span<const double> conditioning) {
    if (static_cast<int>(input.size()) != p.input_dim())
        throw InputError("provider input dimension mismatch: got " +
                         std::to_string(input.size()) + ", declared " +
                         std::to_string(p.input_dim()));
    if (static_cast<int>(conditioning.size()) != p.cond_dim())
        throw InputError("provider conditioning dimension mismatch: got " +
                         std::to_string(conditioning.size()) + ", declared " +
                         std::to_string(p.cond_dim()));
    Eigen::VectorXd out = p.evaluate(input, conditioning);
    if (out.size() != p.output_dim())
        throw ComputeError("provider returned wrong output dimension");
    if (!out.allFinite())
        throw ComputeError("provider returned non-finite output");
    return out;
}

ProviderSet ProviderSet::zeros(int channels, int expression_dim, int pose_dim) {
    ProviderSet set;
    set.displacement = {DeformationProvider::zero(3, expression_dim, 3),
                        DeformationProvider::zero(3, pose_dim, 3),
                        DeformationProvider::zero(3, 3, 3), DeformationProvider::zero(3, 3, 3)};
    set.color = {DeformationProvider::zero(channels, expression_dim, channels),
                 DeformationProvider::zero(channels, pose_dim, channels),
                 DeformationProvider::zero(channels, 3, channels),
                 DeformationProvider::zero(channels, 3, channels)};
    set.attributes = {DeformationProvider::zero(channels, expression_dim, 8),
                      DeformationProvider::zero(channels, pose_dim, 8),
                      DeformationProvider::zero(channels, 3, 8),
                      DeformationProvider::zero(channels, 3, 8)};
    set.eye_offset = DeformationProvider::zero(expression_dim + pose_dim, 0, 3);
    return set;
}

double min_landmark_distance(const Vec3& x, const LandmarkSet& landmarks) {
    if (landmarks.points.empty())
        throw InputError("min_landmark_distance over an empty landmark set");
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : landmarks.points)
        best = std::min(best, (x - p).norm());
    return best;
}

double influence_ramp(double dist, double t_lo, double t_hi) {
    if (dist < t_lo)
        return 1.0;
    if (dist > t_hi)
        return 0.0;
    return (t_hi - dist) / (t_hi - t_lo);
}

double lambda_exp(const Vec3& x, const LandmarkSet& facial_landmarks, double t1, double t2) {
    return influence_ramp(min_landmark_distance(x, facial_landmarks), t1, t2);
}

double lambda_gaze(const Vec3& x, const LandmarkSet& eye_landmarks, double t3, double t4) {
    return influence_ramp(min_landmark_distance(x, eye_landmarks), t3, t4);
}

InfluenceContext InfluenceContext::from_scene(const HeadScene& scene) {
    return {scene.facial_landmarks, scene.eye_landmarks_for(EyeSide::left),
            scene.eye_landmarks_for(EyeSide::right), scene.influence};
}

InfluenceWeights compute_influence(const Vec3& x, const InfluenceContext& ctx) {
    InfluenceWeights w;
    w.exp = lambda_exp(x, ctx.facial, ctx.params.t1, ctx.params.t2);
    w.pose = 1.0 - w.exp;
    w.left_gaze = ctx.left_eye.points.empty()
                      ? 0.0
                      : lambda_gaze(x, ctx.left_eye, ctx.params.t3, ctx.params.t4);
    w.right_gaze = ctx.right_eye.points.empty()
                       ? 0.0
                       : lambda_gaze(x, ctx.right_eye, ctx.params.t3, ctx.params.t4);
    return w;
}

namespace {

std::span<const double> vector_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

std::span<const double> vec3_span(const Vec3& v) {
    return {v.data(), 3};
}

// Accumulates weight * provider(input, cond) into delta. Returns false (and
// touches nothing) when the term cannot contribute: weight exactly zero or
// zero-kind provider. Skipped terms keep untouched Gaussians bit-identical.
bool accumulate_term(Eigen::VectorXd& delta, double weight, const DeformationProvider& provider,
                     std::span<const double> input, std::span<const double> cond) {
    if (weight == 0.0 || provider.is_zero())
        return false;
    delta += weight * eval_provider(provider, input, cond);
    return true;
}

// Runs the four-term weighted blend for one Gaussian. `input_for` picks the
// provider input (positions or feature row) per provider.
template <typename InputFor>
bool blend_family(Eigen::VectorXd& delta, const ProviderFamily& f, const InfluenceWeights& w,
                  const AvatarState& state, InputFor&& input_for) {
    bool contributed = false;
    contributed |= accumulate_term(delta, w.exp, f.exp, input_for(f.exp),
                                   vector_span(state.expression));
    contributed |= accumulate_term(delta, w.pose, f.pose, input_for(f.pose),
                                   vector_span(state.pose));
    contributed |= accumulate_term(delta, w.left_gaze, f.left_gaze, input_for(f.left_gaze),
                                   vec3_span(state.left_gaze));
    contributed |= accumulate_term(delta, w.right_gaze, f.right_gaze, input_for(f.right_gaze),
                                   vec3_span(state.right_gaze));
    return contributed;
}

// Feature-driven providers read the color row F0 (the channels house the
// per-point features); providers declared with a 3-dim input read the
// position instead. For 3-channel scenes the two dimensions coincide and
// positions win: RGB-only sets carry no feature channels to substitute.
std::span<const double> feature_input(const DeformationProvider& p, const GaussianSet& set,
                                      std::size_t i) {
    if (p.input_dim() == 3)
        return vec3_span(set.positions[i]);
    if (p.input_dim() == set.channels)
        return set.color_row(i);
    throw InputError("feature provider input dimension must be 3 or the channel count");
}

} // namespace

std::vector<Vec3> deform_positions(std::span<const Vec3> x0, const ProviderFamily& providers,
                                   const AvatarState& state, const InfluenceContext& ctx) {
    std::vector<Vec3> out(x0.begin(), x0.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const InfluenceWeights w = compute_influence(x0[i], ctx);
        Eigen::VectorXd delta = Eigen::VectorXd::Zero(3);
        const bool contributed = blend_family(delta, providers, w, state,
                                              [&](const DeformationProvider&) {
                                                  return vec3_span(x0[i]);
                                              });
        if (contributed)
            out[i] += Vec3(delta[0], delta[1], delta[2]);
    }
    return out;
}

std::vector<double> blend_colors(const GaussianSet& set, const ProviderFamily& providers,
                                 const AvatarState& state, const InfluenceContext& ctx) {
    const int n = set.channels;
    std::vector<double> deltas(set.count() * static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < set.count(); ++i) {
        const InfluenceWeights w = compute_influence(set.positions[i], ctx);
        Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
        blend_family(delta, providers, w, state, [&](const DeformationProvider& p) {
            return feature_input(p, set, i);
        });
        for (int c = 0; c < n; ++c)
            deltas[i * static_cast<std::size_t>(n) + c] = delta[c];
    }
    return deltas;
}

QsaResult blend_qsa(const GaussianSet& set, const ProviderFamily& providers,
                    const AvatarState& state, const InfluenceContext& ctx) {
    QsaResult out{set.orientations, set.scales, set.opacities};
    for (std::size_t i = 0; i < set.count(); ++i) {
        const InfluenceWeights w = compute_influence(set.positions[i], ctx);
        Eigen::VectorXd delta = Eigen::VectorXd::Zero(8);
        const bool contributed = blend_family(delta, providers, w, state,
                                              [&](const DeformationProvider& p) {
                                                  return feature_input(p, set, i);
                                              });
        if (!contributed)
            continue;
        Quat q(out.orientations[i].w() + delta[0], out.orientations[i].x() + delta[1],
               out.orientations[i].y() + delta[2], out.orientations[i].z() + delta[3]);
        const double norm = q.norm();
        if (norm < 1e-12)
            throw ComputeError("attribute delta collapsed a quaternion to zero norm");
        q.coeffs() /= norm;
        out.orientations[i] = q;
        out.scales[i] = (out.scales[i] + Vec3(delta[4], delta[5], delta[6])).cwiseMax(1e-6);
        out.opacities[i] = std::clamp(out.opacities[i] + delta[7], 0.0, 1.0);
    }
    return out;
}

GaussianSet apply_face_deformation(const HeadScene& scene, const ProviderSet& providers,
                                   const AvatarState& state) {
    const InfluenceContext ctx = InfluenceContext::from_scene(scene);
    const GaussianSet& base = scene.facial;

    GaussianSet out = base;
    auto positions = deform_positions(base.positions, providers.displacement, state, ctx);
    out.positions = std::move(positions);

    const auto color_deltas = blend_colors(base, providers.color, state, ctx);
    for (std::size_t k = 0; k < out.colors.size(); ++k) {
        if (color_deltas[k] != 0.0)
            out.colors[k] += color_deltas[k];
    }

    QsaResult qsa = blend_qsa(base, providers.attributes, state, ctx);
    out.orientations = std::move(qsa.orientations);
    out.scales = std::move(qsa.scales);
    out.opacities = std::move(qsa.opacities);
    return out;
}

} // namespace splatgaze
