#include "affine/io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "affine/format.hpp"

namespace affine {

void write_run_header(std::ostream& os,
                      const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [k, v] : kv) os << "# " << k << " = " << v << "\n";
}

void write_path_table(std::ostream& os, const ProcessPath& p) {
  os << "# columns: t";
  for (int k = 0; k < p.dim.d(); ++k) os << " X" << (k + 1);
  os << "\n";
  for (std::size_t g = 0; g < p.grid.size(); ++g) {
    os << fmt17(p.grid[g]);
    for (int k = 0; k < p.dim.d(); ++k)
      os << " " << fmt17(p.X((Eigen::Index)k, (Eigen::Index)g));
    os << "\n";
  }
}

void write_driver_table(std::ostream& os, const CadlagPath& p) {
  os << "# mesh = " << fmt17(p.mesh()) << "\n";
  os << "# columns: s";
  for (int k = 0; k < p.dim(); ++k) os << " Z" << (k + 1);
  os << "\n";
  const Mat& g = p.grid();
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    os << fmt17((double)j * p.mesh());
    for (Eigen::Index k = 0; k < g.rows(); ++k) os << " " << fmt17(g(k, j));
    os << "\n";
  }
  os << "# jumps: s";
  for (int k = 0; k < p.dim(); ++k) os << " dZ" << (k + 1);
  os << "\n";
  for (const JumpEvent& e : p.jumps()) {
    os << fmt17(e.s);
    for (Eigen::Index k = 0; k < e.size.size(); ++k) os << " " << fmt17(e.size[k]);
    os << "\n";
  }
}

void write_riccati_table(std::ostream& os, const RiccatiSolution& s) {
  const int d = (int)s.psi.rows();
  os << "# columns: t re_phi im_phi";
  for (int k = 0; k < d; ++k) os << " re_psi" << (k + 1) << " im_psi" << (k + 1);
  os << "\n";
  for (std::size_t q = 0; q < s.t.size(); ++q) {
    os << fmt17(s.t[q]) << " " << fmt17(s.phi[q].real()) << " "
       << fmt17(s.phi[q].imag());
    for (int k = 0; k < d; ++k) {
      const Cplx v = s.psi((Eigen::Index)k, (Eigen::Index)q);
      os << " " << fmt17(v.real()) << " " << fmt17(v.imag());
    }
    os << "\n";
  }
}

void write_compare_table(std::ostream& os, const CompareReport& r) {
  os << "# columns: t re_est im_est se re_pred im_pred z exceeds u...\n";
  for (const auto& pt : r.points) {
    os << fmt17(pt.t) << " " << fmt17(pt.estimate.real()) << " "
       << fmt17(pt.estimate.imag()) << " " << fmt17(pt.se) << " "
       << fmt17(pt.predicted.real()) << " " << fmt17(pt.predicted.imag()) << " "
       << fmt17(pt.z) << " " << (pt.exceeds ? 1 : 0);
    for (Eigen::Index k = 0; k < pt.u0.size(); ++k)
      os << " " << fmt17(pt.u0[k].real()) << " " << fmt17(pt.u0[k].imag());
    os << "\n";
  }
  os << "# exceed = " << r.n_exceed << " critical = " << r.critical
     << " p0 = " << fmt17(r.p0) << "\n";
  os << "# verdict = " << (r.pass ? "PASS" : "FAIL") << "\n";
}

void write_moment_table(std::ostream& os, const MomentReport& r) {
  os << "# columns: t coord estimate se predicted z flagged\n";
  for (const auto& e : r.entries) {
    os << fmt17(e.t) << " " << (e.coord + 1) << " " << fmt17(e.estimate) << " "
       << fmt17(e.se) << " " << fmt17(e.predicted) << " " << fmt17(e.z) << " "
       << (e.flagged ? 1 : 0) << "\n";
  }
  os << "# flagged = " << r.n_flagged << "\n";
  os << "# verdict = " << (r.pass ? "PASS" : "FAIL") << "\n";
}

std::vector<CVec> read_u0_list(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::vector<CVec> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> vals;
    double v;
    while (ls >> v) vals.push_back(v);
    if (!ls.eof()) {
      std::string tok;
      ls.clear();
      ls >> tok;
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": not a number: '" + tok + "'");
    }
    if (vals.empty()) continue;
    if ((int)vals.size() != 2 * d)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(2 * d) +
                        " numbers (re im per coordinate), got " +
                        std::to_string(vals.size()));
    CVec u(d);
    for (int k = 0; k < d; ++k)
      u[k] = Cplx(vals[(std::size_t)(2 * k)], vals[(std::size_t)(2 * k + 1)]);
    out.push_back(std::move(u));
  }
  if (out.empty()) throw ConfigError(path + ": no transform arguments found");
  return out;
}

Vec parse_real_list(const std::string& text, const std::string& what) {
  std::string norm = text;
  for (char& ch : norm)
    if (ch == ',') ch = ' ';
  std::istringstream ls(norm);
  std::vector<double> vals;
  double v;
  while (ls >> v) vals.push_back(v);
  if (!ls.eof()) {
    ls.clear();
    std::string rest;
    ls >> rest;
    throw ConfigError(what + ": not a number: '" + rest + "'");
  }
  if (vals.empty()) throw ConfigError(what + ": no numbers in '" + text + "'");
  Vec out((Eigen::Index)vals.size());
  for (std::size_t k = 0; k < vals.size(); ++k) out[(Eigen::Index)k] = vals[k];
  return out;
}

}  // namespace affine
