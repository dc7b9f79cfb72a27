#include "splatgaze/ply_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "splatgaze/common.hpp"

namespace splatgaze {

static_assert(std::endian::native == std::endian::little,
              "PLY reader assumes a little-endian host");

namespace {

std::vector<std::string> expected_properties(int channels) {
    std::vector<std::string> props = {"x",       "y",       "z",       "opacity",
                                      "scale_0", "scale_1", "scale_2", "rot_0",
                                      "rot_1",   "rot_2",   "rot_3"};
    for (int c = 0; c < channels; ++c)
        props.push_back("ch_" + std::to_string(c));
    return props;
}

double logistic(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

double logit(double p) {
    const double clamped = std::clamp(p, 1e-7, 1.0 - 1e-7);
    return std::log(clamped / (1.0 - clamped));
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw InputError("PLY " + path.string() + ": " + what);
}

} // namespace

GaussianSet load_gaussians(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(path, "cannot open file");

    std::string line;
    if (!std::getline(in, line) || line != "ply")
        fail(path, "missing 'ply' magic line");
    if (!std::getline(in, line) || line != "format binary_little_endian 1.0")
        fail(path, "unsupported format (need binary_little_endian 1.0)");

    std::size_t count = 0;
    bool have_element = false;
    std::vector<std::string> properties;
    while (std::getline(in, line)) {
        if (line == "end_header")
            break;
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        if (token == "comment")
            continue;
        if (token == "element") {
            std::string name;
            long long n = -1;
            ls >> name >> n;
            if (name != "vertex" || n < 0)
                fail(path, "expected 'element vertex <count>', got '" + line + "'");
            count = static_cast<std::size_t>(n);
            have_element = true;
        } else if (token == "property") {
            std::string type, name;
            ls >> type >> name;
            if (type != "float")
                fail(path, "property '" + name + "' must be float");
            properties.push_back(name);
        } else {
            fail(path, "malformed header line '" + line + "'");
        }
    }
    if (!in)
        fail(path, "header ended before end_header");
    if (!have_element)
        fail(path, "missing vertex element");

    if (properties.size() < 12)
        fail(path, "too few properties for the splat schema");
    const int channels = static_cast<int>(properties.size()) - 11;
    const auto expected = expected_properties(channels);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (properties[i] != expected[i])
            fail(path, "property " + std::to_string(i) + " is '" + properties[i] +
                           "', expected '" + expected[i] + "'");
    }

    const std::size_t stride = properties.size();
    std::vector<float> raw(count * stride);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != raw.size() * sizeof(float))
        fail(path, "vertex count mismatch: header declares " + std::to_string(count) +
                       " vertices but the payload is short");

    GaussianSet set;
    set.channels = channels;
    set.positions.resize(count);
    set.orientations.resize(count);
    set.scales.resize(count);
    set.opacities.resize(count);
    set.colors.resize(count * static_cast<std::size_t>(channels));

    for (std::size_t i = 0; i < count; ++i) {
        const float* v = raw.data() + i * stride;
        for (std::size_t k = 0; k < stride; ++k) {
            if (!std::isfinite(v[k]))
                fail(path, "non-finite value in property '" + properties[k] +
                               "' at element " + std::to_string(i));
        }
        set.positions[i] = Vec3(v[0], v[1], v[2]);
        set.opacities[i] = logistic(v[3]);
        set.scales[i] = Vec3(std::exp(v[4]), std::exp(v[5]), std::exp(v[6]));
        set.orientations[i] = Quat(v[7], v[8], v[9], v[10]); // (w, x, y, z)
        const double qn = set.orientations[i].norm();
        if (!(qn > 0.0) || std::abs(qn - 1.0) > 1e-6)
            fail(path, "quaternion norm deviates from 1 at element " + std::to_string(i));
        for (int c = 0; c < channels; ++c)
            set.color_row(i)[c] = v[11 + c];
    }
    return set;
}

void save_gaussians(const GaussianSet& set, const std::filesystem::path& path) {
    auto violations = validate(set);
    if (!violations.empty())
        throw InputError("refusing to save invalid GaussianSet: " + to_string(violations.front()));

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("PLY " + path.string() + ": cannot open for writing");

    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << set.count() << "\n";
    for (const auto& name : expected_properties(set.channels))
        out << "property float " << name << "\n";
    out << "end_header\n";

    const std::size_t stride = 11 + static_cast<std::size_t>(set.channels);
    std::vector<float> row(stride);
    for (std::size_t i = 0; i < set.count(); ++i) {
        const Vec3& p = set.positions[i];
        const Vec3& s = set.scales[i];
        const Quat& q = set.orientations[i];
        row[0] = static_cast<float>(p.x());
        row[1] = static_cast<float>(p.y());
        row[2] = static_cast<float>(p.z());
        row[3] = static_cast<float>(logit(set.opacities[i]));
        row[4] = static_cast<float>(std::log(s.x()));
        row[5] = static_cast<float>(std::log(s.y()));
        row[6] = static_cast<float>(std::log(s.z()));
        row[7] = static_cast<float>(q.w());
        row[8] = static_cast<float>(q.x());
        row[9] = static_cast<float>(q.y());
        row[10] = static_cast<float>(q.z());
        for (int c = 0; c < set.channels; ++c)
            row[11 + c] = static_cast<float>(set.color_row(i)[c]);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out)
        throw InputError("PLY " + path.string() + ": write failed");
}

} // namespace splatgaze
