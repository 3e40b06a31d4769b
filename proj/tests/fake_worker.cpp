// Minimal protocol-conformant worker used by the client tests.
//
//   fake_worker [--bounds A B] [--fail-axis-level AXIS=LEVEL] [--exit-after N]
//               [--hang-after N] [--out-of-range] [--bad-handshake] [--wrong-id]
//
// The value is a deterministic hash of (assignment, seed) mapped into the
// declared bounds, or the "value" axis level when such an axis exists.

#include <chrono>
#include <cstdint>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>

#include "json.hpp"

namespace {
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

int main(int argc, char** argv) {
  double lo = 0.0, hi = 1.0;
  std::string fail_axis, fail_level;
  long exit_after = -1, hang_after = -1;
  bool out_of_range = false, bad_handshake = false, wrong_id = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--bounds" && i + 2 < argc) {
      lo = std::stod(argv[++i]);
      hi = std::stod(argv[++i]);
    } else if (a == "--fail-axis-level" && i + 1 < argc) {
      const std::string kv = argv[++i];
      fail_axis = kv.substr(0, kv.find('='));
      fail_level = kv.substr(kv.find('=') + 1);
    } else if (a == "--exit-after" && i + 1 < argc) {
      exit_after = std::stol(argv[++i]);
    } else if (a == "--hang-after" && i + 1 < argc) {
      hang_after = std::stol(argv[++i]);
    } else if (a == "--out-of-range") {
      out_of_range = true;
    } else if (a == "--bad-handshake") {
      bad_handshake = true;
    } else if (a == "--wrong-id") {
      wrong_id = true;
    }
  }
  if (bad_handshake) {
    std::cout << "hello there" << std::endl;
    return 0;
  }
  nlohmann::ordered_json hello;
  hello["type"] = "ready";
  hello["name"] = "fake";
  hello["bounds"] = {lo, hi};
  std::cout << hello.dump() << std::endl;

  long served = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto req = nlohmann::json::parse(line, nullptr, false);
    if (req.is_discarded()) {
      std::cout << R"({"type":"fatal","message":"malformed request"})" << std::endl;
      return 1;
    }
    const auto type = req.value("type", "");
    if (type == "shutdown") return 0;
    if (exit_after >= 0 && served >= exit_after) return 5;
    if (hang_after >= 0 && served >= hang_after) std::this_thread::sleep_for(std::chrono::hours(1));
    ++served;
    const auto id = req.at("id").get<std::uint64_t>();
    nlohmann::ordered_json rep;
    const auto& assignment = req.at("assignment");
    if (!fail_axis.empty() && assignment.contains(fail_axis)) {
      const auto& lv = assignment[fail_axis];
      const std::string s = lv.is_string() ? lv.get<std::string>() : lv.dump();
      if (s == fail_level) {
        rep["type"] = "error";
        rep["id"] = id;
        rep["message"] = "refusing " + fail_axis + "=" + s;
        std::cout << rep.dump() << std::endl;
        continue;
      }
    }
    double value;
    if (assignment.contains("value") && assignment["value"].is_number()) {
      value = assignment["value"].get<double>();
    } else {
      const std::uint64_t h = mix(std::hash<std::string>{}(assignment.dump()) ^ mix(req.at("seed").get<std::uint64_t>()));
      value = lo + (hi - lo) * static_cast<double>(h >> 11) * 0x1.0p-53;
    }
    if (out_of_range) value = hi + 1.0;
    rep["type"] = "result";
    rep["id"] = wrong_id ? id + 1000 : id;
    rep["value"] = value;
    std::cout << rep.dump() << std::endl;
  }
  return 0;
}
