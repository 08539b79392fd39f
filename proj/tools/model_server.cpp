// Reference external model speaking the line protocol on stdin/stdout:
// requests {"id": <uint>, "z": [..]} answered as {"id": <uint>, "y": <float>},
// one JSON document per line; a blank line (or EOF) shuts the server down.
// When the last argument is a queries.csv path the server instead runs one
// batch in CSV mode and writes predictions.csv next to it.
//
// Modes:
//   const <y>        always answer y
//   idfrac <k>       answer id/k (clamped to [0,1])
//   moons <sharp> <d> the crescent classifier
//   bad              answer y = 2 (protocol-violating, for client tests)
//   die <n>          answer n requests, then exit
// Flags:
//   --reverse-chunk <r>  buffer r requests and answer them in reverse order

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eagle/blackbox.hpp"

namespace {

using json = nlohmann::json;

struct Server {
  std::string mode = "const";
  double const_y = 0.5;
  double idfrac_k = 1.0;
  long die_after = -1;
  int reverse_chunk = 1;
  std::unique_ptr<eagle::MoonsModel> moons;

  double answer(std::uint64_t id, const std::vector<double>& z) const {
    if (mode == "const") return const_y;
    if (mode == "idfrac") {
      const double y = static_cast<double>(id) / idfrac_k;
      return y < 0.0 ? 0.0 : (y > 1.0 ? 1.0 : y);
    }
    if (mode == "bad") return 2.0;
    Eigen::VectorXd v =
        Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
    return moons->predict(v);
  }
};

int run_csv(const Server& server, const std::string& queries_path) {
  std::ifstream in(queries_path);
  if (!in) {
    std::fprintf(stderr, "cannot read %s\n", queries_path.c_str());
    return 1;
  }
  std::string header;
  std::getline(in, header);

  const auto slash = queries_path.find_last_of('/');
  const std::string dir = slash == std::string::npos ? "." : queries_path.substr(0, slash);
  std::ofstream out(dir + "/predictions.csv");
  out << "id,y\n";

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    const std::uint64_t id = std::stoull(field);
    std::vector<double> z;
    while (std::getline(row, field, ',')) z.push_back(std::stod(field));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", server.answer(id, z));
    out << id << ',' << buf << '\n';
  }
  return 0;
}

int run_stdio(const Server& server) {
  std::string line;
  long answered = 0;
  std::vector<std::pair<std::uint64_t, std::vector<double>>> pending;

  const auto flush_pending = [&]() {
    // Answer buffered requests last-in-first-out to exercise clients'
    // order-independent matching.
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
      json resp;
      resp["id"] = it->first;
      resp["y"] = server.answer(it->first, it->second);
      std::cout << resp.dump() << '\n';
    }
    std::cout.flush();
    pending.clear();
  };

  while (std::getline(std::cin, line)) {
    if (line.empty()) break;  // shutdown request
    json req;
    try {
      req = json::parse(line);
    } catch (const json::parse_error& e) {
      std::fprintf(stderr, "bad request line: %s\n", e.what());
      return 1;
    }
    pending.emplace_back(req.at("id").get<std::uint64_t>(),
                         req.at("z").get<std::vector<double>>());
    if (static_cast<int>(pending.size()) >= server.reverse_chunk) flush_pending();
    answered += 1;
    if (server.die_after >= 0 && answered >= server.die_after) {
      flush_pending();
      return 0;
    }
  }
  flush_pending();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Server server;
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string csv_path;

  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "const") {
      server.mode = "const";
      server.const_y = std::stod(args.at(++i));
    } else if (a == "idfrac") {
      server.mode = "idfrac";
      server.idfrac_k = std::stod(args.at(++i));
    } else if (a == "moons") {
      server.mode = "moons";
      const double sharp = std::stod(args.at(++i));
      const int dim = std::stoi(args.at(++i));
      server.moons = std::make_unique<eagle::MoonsModel>(sharp, dim);
    } else if (a == "bad") {
      server.mode = "bad";
    } else if (a == "die") {
      server.die_after = std::stol(args.at(++i));
    } else if (a == "--reverse-chunk") {
      server.reverse_chunk = std::stoi(args.at(++i));
    } else if (a.size() > 4 && a.substr(a.size() - 4) == ".csv") {
      csv_path = a;
    } else {
      std::fprintf(stderr, "unknown argument: %s\n", a.c_str());
      return 2;
    }
  }

  if (!csv_path.empty()) return run_csv(server, csv_path);
  return run_stdio(server);
}
