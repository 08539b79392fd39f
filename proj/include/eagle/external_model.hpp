#pragma once

#include <string>
#include <vector>

#include "eagle/blackbox.hpp"

namespace eagle {

// How to reach an external model process.
//   stdio: one long-lived process; newline-delimited JSON requests
//          {"id": <uint>, "z": [..]} on its stdin, responses
//          {"id": <uint>, "y": <float>} on its stdout, matched by id.
//          A blank line tells the process to shut down.
//   csv:   one process invocation per batch; the client writes
//          queries.csv (header id,z0,...,z{d-1}), appends its path to argv,
//          and reads predictions.csv (header id,y) from the same directory.
struct ExternalModelSpec {
  enum class Transport { stdio, csv };

  std::vector<std::string> argv;
  Transport transport = Transport::stdio;
  int timeout_ms = 10000;
  std::string scratch_dir = ".";  // csv mode working files go here

  void validate() const;
};

// Black box served by a separate process. Responses are matched to requests
// by id, so the server may answer out of order. Responses outside [0,1] or
// malformed lines abort the run with a diagnostic. One in-flight batch per
// process; distinct instances may serve parallel explanations.
class ExternalProcessModel : public BlackBox {
 public:
  explicit ExternalProcessModel(ExternalModelSpec spec);
  ~ExternalProcessModel() override;

  ExternalProcessModel(const ExternalProcessModel&) = delete;
  ExternalProcessModel& operator=(const ExternalProcessModel&) = delete;

 protected:
  double do_predict(const Eigen::VectorXd& z) override;
  std::vector<double> do_batch_predict(const std::vector<Eigen::VectorXd>& zs) override;

 private:
  void ensure_spawned();
  void shutdown() noexcept;
  std::vector<double> stdio_batch(const std::vector<Eigen::VectorXd>& zs);
  std::vector<double> csv_batch(const std::vector<Eigen::VectorXd>& zs);

  ExternalModelSpec spec_;
  std::uint64_t next_id_ = 0;
  int child_pid_ = -1;
  int to_child_ = -1;    // write end of the child's stdin
  int from_child_ = -1;  // read end of the child's stdout
  std::string read_buffer_;
};

}  // namespace eagle
