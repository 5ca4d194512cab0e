#include "symchaos/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "symchaos/errors.hpp"
#include "symchaos/symbolic.hpp"

namespace symchaos {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), std::streamsize(content.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

void write_trajectory_csv(std::ostream& out, const Trajectory<double>& traj) {
  out << "t,x,y,z\n";
  for (Eigen::Index k = 0; k < traj.size(); ++k) {
    out << format_double(traj.time(k)) << ',' << format_double(traj.samples(k, 0)) << ','
        << format_double(traj.samples(k, 1)) << ',' << format_double(traj.samples(k, 2)) << '\n';
  }
}

void write_events_csv(std::ostream& out, std::span<const CriticalEvent> events) {
  out << "index,time,value,kind,channel\n";
  for (const auto& e : events) {
    out << e.index << ',' << format_double(e.time) << ',' << format_double(e.value) << ',' << to_string(e.kind)
        << ',' << to_string(e.channel) << '\n';
  }
}

std::string format_sequence(std::span<const std::uint8_t> bits) { return to_string(bits) + '\n'; }

void write_entropy_profile_csv(std::ostream& out, const BlockEntropyProfile& profile) {
  out << "m,H_m,h_m,M_m\n";
  for (int m = 0; m <= profile.m_max; ++m) {
    out << m << ',' << format_double(profile.H[m]) << ',' << format_double(profile.h[m]) << ',' << profile.M[m]
        << '\n';
  }
}

void write_complexity_csv(std::ostream& out, const ComplexityReport& r) {
  out << "N,H1,h_star,lz_phrases,lz,p11,p10,p01,p00,compressibility,period,code\n";
  out << r.entropy.N << ',' << format_double(r.entropy.H[1]) << ',' << format_double(r.source_entropy) << ','
      << r.lz.phrase_count << ',' << format_double(r.lz.lz) << ',' << format_double(r.markov.p11) << ','
      << format_double(r.markov.p10) << ',' << format_double(r.markov.p01) << ','
      << format_double(r.markov.p00) << ',' << format_double(r.compressibility) << ',';
  if (r.detected_period) out << *r.detected_period;
  out << ',' << r.code << '\n';
}

void write_lyapunov_csv(std::ostream& out, double param, const LyapunovResult& r) {
  out << "param,Lambda,tau,lambda_tau,converged\n";
  out << format_double(param) << ',' << format_double(r.Lambda) << ',' << format_double(r.tau) << ','
      << format_double(r.lambda_dimensionless) << ',' << (r.converged ? 1 : 0) << '\n';
}

}  // namespace symchaos
