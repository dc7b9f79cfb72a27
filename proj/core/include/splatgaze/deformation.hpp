#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "splatgaze/scene.hpp"

namespace splatgaze {

// Affine + ReLU chain; identity on the output layer. Each layer maps
// cols -> rows.
struct TinyMlp {
    struct Layer {
        Eigen::MatrixXd weights; // rows x cols
        Eigen::VectorXd bias;    // rows
    };
    std::vector<Layer> layers;

    int input_dim() const;
    int output_dim() const;
    Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
};

// Weights file: JSON {"layers": [{"rows", "cols", "weights" (row-major),
// "bias"}, ...]}. Dimensions and finiteness validated on load.
TinyMlp load_tiny_mlp(const std::filesystem::path& path);
void save_tiny_mlp(const TinyMlp& mlp, const std::filesystem::path& path);

// Closed-form field for fixtures: a Gaussian bump around `center` scaled by
// the summed conditioning,
//   out = amplitude * exp(-|p - center|^2 / (2 ls^2)) * (bias + cond_gain * sum(cond))
// where p is the first three input components.
struct RadialParams {
    Vec3 center = Vec3::Zero();
    double length_scale = 1.0;
    Eigen::VectorXd amplitude; // output_dim entries
    double cond_gain = 0.0;
    double bias = 1.0;
};

enum class ProviderKind { zero, constant, radial_parametric, tiny_mlp };

// A conditioned field evaluated per Gaussian. `input_dim` is the
// non-conditioning part (3 for position-driven fields, N for feature-driven
// ones); tiny-MLP providers see the concatenation input ++ conditioning.
class DeformationProvider {
public:
    DeformationProvider() = default;

    static DeformationProvider zero(int input_dim, int cond_dim, int output_dim);
    static DeformationProvider constant(Eigen::VectorXd value, int input_dim, int cond_dim);
    static DeformationProvider radial(RadialParams params, int input_dim, int cond_dim);
    static DeformationProvider mlp(TinyMlp mlp, int input_dim, int cond_dim);

    ProviderKind kind() const { return kind_; }
    bool is_zero() const { return kind_ == ProviderKind::zero; }
    int input_dim() const { return input_dim_; }
    int cond_dim() const { return cond_dim_; }
    int output_dim() const { return output_dim_; }

    Eigen::VectorXd evaluate(std::span<const double> input,
                             std::span<const double> conditioning) const;

private:
    ProviderKind kind_ = ProviderKind::zero;
    int input_dim_ = 3;
    int cond_dim_ = 0;
    int output_dim_ = 3;
    Eigen::VectorXd constant_;
    RadialParams radial_;
    TinyMlp mlp_;
};

// Checks signature, evaluates, checks the output is finite and of the
// declared dimension.
Eigen::VectorXd eval_provider(const DeformationProvider& p, std::span<const double> input,
                              std::span<const double> conditioning);

// exp / pose / per-side gaze providers for one attribute family.
struct ProviderFamily {
    DeformationProvider exp;
    DeformationProvider pose;
    DeformationProvider left_gaze;
    DeformationProvider right_gaze;
};

struct ProviderSet {
    ProviderFamily displacement; // outputs 3
    ProviderFamily color;        // outputs N
    ProviderFamily attributes;   // outputs 8: 4 rotation, 3 scale, 1 opacity
    DeformationProvider eye_offset; // (expression ++ pose) -> 3

    static ProviderSet zeros(int channels, int expression_dim, int pose_dim);
};

double min_landmark_distance(const Vec3& x, const LandmarkSet& landmarks);

// Piecewise-linear ramp: 1 below t_lo, 0 above t_hi, linear between.
double influence_ramp(double dist, double t_lo, double t_hi);

double lambda_exp(const Vec3& x, const LandmarkSet& facial_landmarks, double t1, double t2);
double lambda_gaze(const Vec3& x, const LandmarkSet& eye_landmarks, double t3, double t4);

// Landmark sets and thresholds the blend ops weight against.
struct InfluenceContext {
    LandmarkSet facial;
    LandmarkSet left_eye;
    LandmarkSet right_eye;
    InfluenceParams params;

    static InfluenceContext from_scene(const HeadScene& scene);
};

struct InfluenceWeights {
    double exp = 0;
    double pose = 1;
    double left_gaze = 0;
    double right_gaze = 0;
};

InfluenceWeights compute_influence(const Vec3& x, const InfluenceContext& ctx);

// X = X0 + sum of influence-weighted displacement deltas. Terms whose weight
// is exactly zero (or whose provider is the zero kind) are never evaluated,
// so Gaussians beyond t4 of both eyes are bitwise independent of gaze.
std::vector<Vec3> deform_positions(std::span<const Vec3> x0, const ProviderFamily& providers,
                                   const AvatarState& state, const InfluenceContext& ctx);

// Weighted color deltas (count x channels, row-major). Callers add these to
// the base colors; zero providers yield exact zeros.
std::vector<double> blend_colors(const GaussianSet& set, const ProviderFamily& providers,
                                 const AvatarState& state, const InfluenceContext& ctx);

struct QsaResult {
    std::vector<Quat> orientations;
    std::vector<Vec3> scales;
    std::vector<double> opacities;
};

// {Q,S,A} plus weighted 8-component deltas, then per-element cleanup:
// quaternions renormalized, scales clamped to >= 1e-6, opacity clamped to
// [0,1]. Elements that received no delta are copied bitwise.
QsaResult blend_qsa(const GaussianSet& set, const ProviderFamily& providers,
                    const AvatarState& state, const InfluenceContext& ctx);

// Full facial-stream deformation: positions, colors, and Q/S/A.
GaussianSet apply_face_deformation(const HeadScene& scene, const ProviderSet& providers,
                                   const AvatarState& state);

} // namespace splatgaze
