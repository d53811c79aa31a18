#include "fieldscope/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fieldscope {

Normalizer Normalizer::from_bounds(const Bounds& b) {
    if (!(b.x_min < b.x_max) || !(b.y_min < b.y_max))
        throw std::invalid_argument("normalizer bounds must satisfy min < max");
    return {b.x_min, b.x_max, b.y_min, b.y_max};
}

Vec2 Normalizer::normalize(Vec2 p) const {
    return {2.0 * (p.x - x_lo) / (x_hi - x_lo) - 1.0, 2.0 * (p.y - y_lo) / (y_hi - y_lo) - 1.0};
}

Vec2 Normalizer::denormalize(Vec2 u) const {
    return {x_lo + (u.x + 1.0) * 0.5 * (x_hi - x_lo), y_lo + (u.y + 1.0) * 0.5 * (y_hi - y_lo)};
}

Eigen::Matrix<double, kHiddenUnits, 1> MlpModel::hidden(Vec2 u) const {
    const Eigen::Vector2d in(u.x, u.y);
    return (W1 * in + b1).array().tanh().matrix();
}

Vec2 MlpModel::forward(Vec2 p) const {
    const Eigen::Vector2d out = W2 * hidden(norm.normalize(p)) + b2;
    return {out(0), out(1)};
}

Eigen::Matrix<double, kParamCount, 1> MlpModel::pack() const {
    Eigen::Matrix<double, kParamCount, 1> theta;
    int t = 0;
    for (int j = 0; j < kHiddenUnits; ++j)
        for (int i = 0; i < 2; ++i) theta(t++) = W1(j, i);
    for (int j = 0; j < kHiddenUnits; ++j) theta(t++) = b1(j);
    for (int c = 0; c < 2; ++c)
        for (int j = 0; j < kHiddenUnits; ++j) theta(t++) = W2(c, j);
    for (int c = 0; c < 2; ++c) theta(t++) = b2(c);
    return theta;
}

void MlpModel::unpack(const Eigen::Matrix<double, kParamCount, 1>& theta) {
    int t = 0;
    for (int j = 0; j < kHiddenUnits; ++j)
        for (int i = 0; i < 2; ++i) W1(j, i) = theta(t++);
    for (int j = 0; j < kHiddenUnits; ++j) b1(j) = theta(t++);
    for (int c = 0; c < 2; ++c)
        for (int j = 0; j < kHiddenUnits; ++j) W2(c, j) = theta(t++);
    for (int c = 0; c < 2; ++c) b2(c) = theta(t++);
}

namespace {

std::string full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_model(const MlpModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    out << "mlp 2 " << kHiddenUnits << " 2 seed " << m.seed << "\n";
    out << "W1";
    for (int j = 0; j < kHiddenUnits; ++j)
        for (int i = 0; i < 2; ++i) out << ' ' << full(m.W1(j, i));
    out << "\nb1";
    for (int j = 0; j < kHiddenUnits; ++j) out << ' ' << full(m.b1(j));
    out << "\nW2";
    for (int c = 0; c < 2; ++c)
        for (int j = 0; j < kHiddenUnits; ++j) out << ' ' << full(m.W2(c, j));
    out << "\nb2";
    for (int c = 0; c < 2; ++c) out << ' ' << full(m.b2(c));
    out << "\nnorm " << full(m.norm.x_lo) << ' ' << full(m.norm.x_hi) << ' ' << full(m.norm.y_lo)
        << ' ' << full(m.norm.y_hi) << "\n";
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);

    const auto fail = [&](const std::string& why) {
        throw std::runtime_error("bad model file " + path + ": " + why);
    };

    std::string line;
    if (!std::getline(in, line)) fail("missing header");
    std::istringstream header(line);
    std::string tag;
    int n_in = 0, n_hidden = 0, n_out = 0;
    std::string seed_tag;
    std::uint64_t seed = 0;
    header >> tag >> n_in >> n_hidden >> n_out >> seed_tag >> seed;
    if (tag != "mlp" || n_in != 2 || n_hidden != kHiddenUnits || n_out != 2 ||
        seed_tag != "seed")
        fail("unsupported architecture header");

    MlpModel m;
    m.seed = seed;
    const auto read_group = [&](const std::string& name, double* dst, int count) {
        if (!std::getline(in, line)) fail("missing group " + name);
        std::istringstream row(line);
        std::string got;
        row >> got;
        if (got != name) fail("expected group " + name + ", got " + got);
        for (int i = 0; i < count; ++i)
            if (!(row >> dst[i])) fail("short group " + name);
    };

    double w1[kHiddenUnits * 2], bias1[kHiddenUnits], w2[2 * kHiddenUnits], bias2[2], nrm[4];
    read_group("W1", w1, kHiddenUnits * 2);
    read_group("b1", bias1, kHiddenUnits);
    read_group("W2", w2, 2 * kHiddenUnits);
    read_group("b2", bias2, 2);
    read_group("norm", nrm, 4);

    int t = 0;
    for (int j = 0; j < kHiddenUnits; ++j)
        for (int i = 0; i < 2; ++i) m.W1(j, i) = w1[t++];
    for (int j = 0; j < kHiddenUnits; ++j) m.b1(j) = bias1[j];
    t = 0;
    for (int c = 0; c < 2; ++c)
        for (int j = 0; j < kHiddenUnits; ++j) m.W2(c, j) = w2[t++];
    m.b2 << bias2[0], bias2[1];
    m.norm = {nrm[0], nrm[1], nrm[2], nrm[3]};
    if (!(m.norm.x_lo < m.norm.x_hi) || !(m.norm.y_lo < m.norm.y_hi))
        fail("degenerate normalizer");
    return m;
}

}  // namespace fieldscope
