#include "sdfplan/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sdfplan/errors.hpp"

namespace sdfplan {

namespace {

const char* kTrajMagic = "sdfplan-trajectory 1";
const char* kTimedMagic = "sdfplan-timed-trajectory 1";
const char* kLogMagic = "sdfplan-plan-log 1";

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("file not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_comments(std::ostream& out, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << "\n";
}

void write_row(std::ostream& out, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    for (Eigen::Index j = 0; j < row.size(); ++j) out << (j ? " " : "") << num(row[j]);
    out << "\n";
}

// Numeric rows after the magic line, skipping comments and blank lines.
std::vector<std::vector<double>> numeric_rows(const std::string& text, const std::string& magic) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != magic) throw InputError("expected header '" + magic + "'");
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> r;
        std::string tok;
        while (ls >> tok) {
            try {
                std::size_t used = 0;
                r.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw InputError("line " + std::to_string(lineno) + ": not a number: '" + tok + "'");
            }
        }
        if (!rows.empty() && r.size() != rows.front().size())
            throw InputError("line " + std::to_string(lineno) + ": inconsistent column count");
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

void write_trajectory(const std::filesystem::path& path, const Eigen::MatrixXd& states,
                      const std::vector<std::string>& comments) {
    auto out = open_out(path);
    out << kTrajMagic << "\n";
    write_comments(out, comments);
    out << "# waypoints " << states.rows() << " dims " << states.cols() << "\n";
    for (Eigen::Index i = 0; i < states.rows(); ++i) write_row(out, states.row(i));
}

Eigen::MatrixXd parse_trajectory(const std::string& text) {
    const auto rows = numeric_rows(text, kTrajMagic);
    if (rows.empty() || rows.front().empty()) throw InputError("trajectory has no waypoints");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    if (!m.allFinite()) throw InputError("trajectory contains non-finite values");
    return m;
}

Eigen::MatrixXd read_trajectory(const std::filesystem::path& path) { return parse_trajectory(slurp(path)); }

void write_timed_trajectory(const std::filesystem::path& path, const TimedTrajectory& traj,
                            const std::vector<std::string>& comments) {
    auto out = open_out(path);
    out << kTimedMagic << "\n";
    write_comments(out, comments);
    const Eigen::Index D = traj.q.cols();
    out << "# columns: t s";
    for (const char* p : {"q", "qd", "qdd"})
        for (Eigen::Index d = 0; d < D; ++d) out << " " << p << d;
    out << "\n";
    Eigen::RowVectorXd row(2 + 3 * D);
    for (Eigen::Index i = 0; i < traj.t.size(); ++i) {
        row << traj.t[i], traj.s[i], traj.q.row(i), traj.qd.row(i), traj.qdd.row(i);
        write_row(out, row);
    }
}

TimedTrajectory read_timed_trajectory(const std::filesystem::path& path) {
    const auto rows = numeric_rows(slurp(path), kTimedMagic);
    if (rows.empty()) throw InputError("timed trajectory has no samples");
    const std::size_t cols = rows.front().size();
    if (cols < 5 || (cols - 2) % 3 != 0) throw InputError("timed trajectory has a malformed column count");
    const auto D = static_cast<Eigen::Index>((cols - 2) / 3);
    const auto N = static_cast<Eigen::Index>(rows.size());
    TimedTrajectory t;
    t.t.resize(N);
    t.s.resize(N);
    t.q.resize(N, D);
    t.qd.resize(N, D);
    t.qdd.resize(N, D);
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        t.t[i] = r[0];
        t.s[i] = r[1];
        for (Eigen::Index d = 0; d < D; ++d) {
            t.q(i, d) = r[static_cast<std::size_t>(2 + d)];
            t.qd(i, d) = r[static_cast<std::size_t>(2 + D + d)];
            t.qdd(i, d) = r[static_cast<std::size_t>(2 + 2 * D + d)];
        }
    }
    return t;
}

void write_plan_log(const std::filesystem::path& path, const PlanResult& result,
                    const std::vector<std::string>& comments) {
    auto out = open_out(path);
    out << kLogMagic << "\n";
    write_comments(out, comments);
    out << "# success " << (result.success ? 1 : 0) << " iterations " << result.iterations << "\n";
    out << "# columns: iter obstacle_cost length total_cost sigma_f weight_entropy\n";
    for (const auto& e : result.log)
        out << e.iter << " " << num(e.obstacle_cost) << " " << num(e.length) << " " << num(e.total_cost) << " "
            << num(e.sigma_f) << " " << num(e.weight_entropy) << "\n";
}

std::vector<IterationLog> read_plan_log(const std::filesystem::path& path) {
    std::vector<IterationLog> log;
    for (const auto& r : numeric_rows(slurp(path), kLogMagic)) {
        if (r.size() != 6) throw InputError("plan log rows need 6 columns");
        IterationLog e;
        e.iter = static_cast<int>(r[0]);
        e.obstacle_cost = r[1];
        e.length = r[2];
        e.total_cost = r[3];
        e.sigma_f = r[4];
        e.weight_entropy = r[5];
        log.push_back(e);
    }
    return log;
}

void write_samples(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, const std::vector<Eigen::MatrixXd>*>>& groups,
                   const std::vector<std::string>& comments) {
    auto out = open_out(path);
    out << "sdfplan-samples 1\n";
    write_comments(out, comments);
    out << "# columns: group sample waypoint state...\n";
    for (const auto& [tag, samples] : groups) {
        for (std::size_t k = 0; k < samples->size(); ++k) {
            const Eigen::MatrixXd& s = (*samples)[k];
            for (Eigen::Index i = 0; i < s.rows(); ++i) {
                out << tag << " " << k << " " << i;
                for (Eigen::Index j = 0; j < s.cols(); ++j) out << " " << num(s(i, j));
                out << "\n";
            }
        }
    }
}

void write_means(const std::filesystem::path& path, const std::vector<std::pair<int, Eigen::MatrixXd>>& means,
                 const std::vector<std::string>& comments) {
    auto out = open_out(path);
    out << "sdfplan-means 1\n";
    write_comments(out, comments);
    out << "# columns: iter waypoint state...\n";
    for (const auto& [iter, m] : means) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            out << iter << " " << i;
            for (Eigen::Index j = 0; j < m.cols(); ++j) out << " " << num(m(i, j));
            out << "\n";
        }
    }
}

}  // namespace sdfplan
