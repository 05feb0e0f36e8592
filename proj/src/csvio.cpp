#include <fairdyn/csvio.hpp>

#include <cstdio>
#include <fstream>

#include <fairdyn/errors.hpp>

namespace fairdyn {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

void close_out(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out.good()) throw IoError("failed writing '" + path + "'");
}

}  // namespace

void emit_trajectory(const Trajectory& traj, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t,theta_a,theta_b,loss_a,loss_b,alpha_a,n_a,n_b,step_total_loss,"
           "avg_total_loss\n";
    for (const TrajectoryStep& s : traj.steps) {
        out << s.t << ',' << format_value(s.theta_a) << ','
            << format_value(s.theta_b) << ',' << format_value(s.loss_a) << ','
            << format_value(s.loss_b) << ',' << format_value(s.alpha_a) << ','
            << format_value(s.n_a) << ',' << format_value(s.n_b) << ','
            << format_value(s.step_total_loss) << ','
            << format_value(s.running_avg_total_loss) << '\n';
    }
    close_out(out, path);
}

void emit_sweep(const SweepResult& sweep, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "beta_a,beta_b,final_alpha_a,final_theta_a,final_theta_b,"
           "final_loss_a,final_loss_b,converged\n";
    for (const SweepCell& c : sweep.cells) {
        out << format_value(c.beta_a) << ',' << format_value(c.beta_b) << ','
            << format_value(c.final_alpha_a) << ','
            << format_value(c.final_theta_a) << ','
            << format_value(c.final_theta_b) << ','
            << format_value(c.final_loss_a) << ','
            << format_value(c.final_loss_b) << ',' << (c.converged ? 1 : 0)
            << '\n';
    }
    close_out(out, path);
}

void emit_tradeoff(const std::vector<TradeoffRow>& rows,
                   const std::string& path) {
    std::ofstream out = open_out(path);
    out << "criterion,avg_total_loss,final_alpha_a\n";
    for (const TradeoffRow& r : rows) {
        out << to_string(r.criterion) << ',' << format_value(r.avg_total_loss)
            << ',' << format_value(r.final_alpha_a) << '\n';
    }
    close_out(out, path);
}

std::string decision_pair_json(const DecisionPair& pair, const GroupSpec& ga,
                               const GroupSpec& gb) {
    std::string s = "{\"criterion\":\"";
    s += to_string(pair.criterion);
    s += "\",\"theta_a\":";
    s += format_value(pair.theta_a);
    s += ",\"theta_b\":";
    s += format_value(pair.theta_b);
    s += ",\"loss_a\":";
    s += format_value(expected_loss(ga, pair.theta_a));
    s += ",\"loss_b\":";
    s += format_value(expected_loss(gb, pair.theta_b));
    s += ",\"residual\":";
    s += format_value(pair.residual);
    s += "}";
    return s;
}

}  // namespace fairdyn
