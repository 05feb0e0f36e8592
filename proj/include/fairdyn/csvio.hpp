#pragma once

#include <string>
#include <vector>

#include <fairdyn/fairsolve.hpp>
#include <fairdyn/horizon.hpp>
#include <fairdyn/popmodel.hpp>

namespace fairdyn {

// Shortest %.12g rendering; every emitter below uses it, so reruns of the
// same scenario produce byte-identical files.
std::string format_value(double v);

// Columns: t,theta_a,theta_b,loss_a,loss_b,alpha_a,n_a,n_b,step_total_loss,
// avg_total_loss. The header is written even for an empty trajectory.
void emit_trajectory(const Trajectory& traj, const std::string& path);

// Columns: beta_a,beta_b,final_alpha_a,final_theta_a,final_theta_b,
// final_loss_a,final_loss_b,converged. One row per cell, grid order.
void emit_sweep(const SweepResult& sweep, const std::string& path);

// Columns: criterion,avg_total_loss,final_alpha_a.
void emit_tradeoff(const std::vector<TradeoffRow>& rows, const std::string& path);

// One-line JSON object for a solved pair, group losses included; numeric
// keys match the trajectory column names.
std::string decision_pair_json(const DecisionPair& pair, const GroupSpec& ga,
                               const GroupSpec& gb);

}  // namespace fairdyn
