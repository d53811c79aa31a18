#include "fieldscope/csv.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fieldscope {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

void expect_header(std::istream& in, const std::string& expected, const char* what) {
    std::string line;
    if (!std::getline(in, line) || line != expected)
        throw std::runtime_error(std::string("bad ") + what + " CSV header, expected: " + expected);
}

double to_double(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::runtime_error("bad numeric CSV cell: " + s);
    return v;
}

int to_int(const std::string& s) {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::runtime_error("bad integer CSV cell: " + s);
    return v;
}

}  // namespace

void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajs) {
    out << "agent_id,k,x_true,y_true,x_meas,y_meas\n";
    for (const auto& t : trajs) {
        for (const auto& pt : t.points) {
            out << t.agent_id << ',' << pt.meas.k << ',' << fmt9(pt.state.x) << ','
                << fmt9(pt.state.y) << ',' << fmt9(pt.meas.x) << ',' << fmt9(pt.meas.y) << '\n';
        }
    }
}

std::vector<Trajectory> read_trajectories_csv(std::istream& in) {
    expect_header(in, "agent_id,k,x_true,y_true,x_meas,y_meas", "trajectory");
    std::map<int, Trajectory> by_agent;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != 6) throw std::runtime_error("trajectory CSV row needs 6 cells");
        TrajectoryPoint pt;
        const int agent = to_int(cells[0]);
        pt.meas.k = to_int(cells[1]);
        pt.state.x = to_double(cells[2]);
        pt.state.y = to_double(cells[3]);
        pt.meas.x = to_double(cells[4]);
        pt.meas.y = to_double(cells[5]);
        auto& traj = by_agent[agent];
        traj.agent_id = agent;
        traj.points.push_back(pt);
    }
    std::vector<Trajectory> out;
    out.reserve(by_agent.size());
    for (auto& [id, traj] : by_agent) out.push_back(std::move(traj));
    return out;
}

void write_innovations_csv(std::ostream& out, const std::vector<AgentInnovations>& agents,
                           double /*dk*/) {
    out << "agent_id,k,x_meas,y_meas,vx_residual,vy_residual\n";
    for (const auto& a : agents) {
        for (const auto& rec : a.records) {
            out << a.agent_id << ',' << rec.z.k << ',' << fmt9(rec.z.x) << ',' << fmt9(rec.z.y)
                << ',' << fmt9(rec.v_residual.x) << ',' << fmt9(rec.v_residual.y) << '\n';
        }
    }
}

std::vector<AgentInnovations> read_innovations_csv(std::istream& in, double dk) {
    expect_header(in, "agent_id,k,x_meas,y_meas,vx_residual,vy_residual", "innovation");
    std::map<int, AgentInnovations> by_agent;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != 6) throw std::runtime_error("innovation CSV row needs 6 cells");
        InnovationRecord rec;
        const int agent = to_int(cells[0]);
        rec.z.k = to_int(cells[1]);
        rec.z.x = to_double(cells[2]);
        rec.z.y = to_double(cells[3]);
        rec.v_residual.x = to_double(cells[4]);
        rec.v_residual.y = to_double(cells[5]);
        rec.y_tilde = {rec.v_residual.x * dk, rec.v_residual.y * dk};
        auto& a = by_agent[agent];
        a.agent_id = agent;
        a.records.push_back(rec);
    }
    std::vector<AgentInnovations> out;
    out.reserve(by_agent.size());
    for (auto& [id, a] : by_agent) out.push_back(std::move(a));
    return out;
}

void write_field_csv(std::ostream& out, const GridField& field) {
    out << "x,y,vx,vy\n";
    const Grid& g = field.grid;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const Vec2 p = g.point(i, j);
            const Vec2 v = field.vectors[g.index(i, j)];
            out << fmt9(p.x) << ',' << fmt9(p.y) << ',' << fmt9(v.x) << ',' << fmt9(v.y) << '\n';
        }
    }
}

GridField read_field_csv(std::istream& in) {
    expect_header(in, "x,y,vx,vy", "field");
    std::vector<Vec2> pts, vecs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != 4) throw std::runtime_error("field CSV row needs 4 cells");
        pts.push_back({to_double(cells[0]), to_double(cells[1])});
        vecs.push_back({to_double(cells[2]), to_double(cells[3])});
    }
    if (pts.size() < 9) throw std::runtime_error("field CSV too small to describe a grid");

    // Row-major: x advances first; the row length is where y first changes.
    std::size_t nx = pts.size();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].y != pts[0].y) {
            nx = i;
            break;
        }
    }
    if (nx < 2 || pts.size() % nx != 0)
        throw std::runtime_error("field CSV rows do not form a regular grid");
    const std::size_t ny = pts.size() / nx;
    const double step = pts[1].x - pts[0].x;
    if (!(step > 0.0)) throw std::runtime_error("field CSV grid step must be positive");

    GridField field;
    field.grid.bounds = {pts[0].x, pts[nx - 1].x, pts[0].y, pts[pts.size() - 1].y};
    field.grid.step = step;
    field.grid.nx = static_cast<int>(nx);
    field.grid.ny = static_cast<int>(ny);
    field.vectors = std::move(vecs);
    return field;
}

void write_objects_csv(std::ostream& out, const std::vector<ObjectRow>& rows) {
    const bool with_truth = !rows.empty() && rows.front().has_truth;
    out << "object_id,x_est,y_est,nature,div_value";
    if (with_truth) out << ",x_true,y_true";
    out << '\n';
    for (const auto& row : rows) {
        out << row.object_id << ',' << fmt9(row.estimate.position.x) << ','
            << fmt9(row.estimate.position.y) << ',' << nature_str(row.estimate.nature) << ','
            << fmt9(row.estimate.div_value);
        if (with_truth) out << ',' << fmt9(row.truth.x) << ',' << fmt9(row.truth.y);
        out << '\n';
    }
}

void write_loss_csv(std::ostream& out, const std::vector<double>& loss_history) {
    out << "epoch,rmse\n";
    for (std::size_t i = 0; i < loss_history.size(); ++i)
        out << i << ',' << fmt9(loss_history[i]) << '\n';
}

}  // namespace fieldscope
