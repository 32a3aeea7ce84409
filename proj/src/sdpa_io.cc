#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "reachsynth/sdp.h"

namespace reachsynth {

namespace {

void WriteEntries(std::ostream& os, int matno, int blkno,
                  const Eigen::MatrixXd& a, bool diagonal) {
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = i; j < a.cols(); ++j) {
      if (diagonal && j != i) continue;
      if (a(i, j) == 0.0) continue;
      os << matno << ' ' << blkno << ' ' << i + 1 << ' ' << j + 1 << ' '
         << a(i, j) << '\n';
    }
  }
}

std::runtime_error SdpaError(int line, const std::string& what) {
  return std::runtime_error("SDPA line " + std::to_string(line) + ": " + what);
}

// Strips SDPA decoration ({ } ( ) ,) so header lines parse as plain numbers.
std::string Clean(std::string s) {
  for (char& ch : s) {
    if (ch == '{' || ch == '}' || ch == '(' || ch == ')' || ch == ',') ch = ' ';
  }
  return s;
}

}  // namespace

std::string FormatSdpa(const SdpProblem& problem) {
  problem.Validate();
  std::ostringstream os;
  os << std::setprecision(17);
  os << problem.n_vars << '\n' << problem.blocks.size() << '\n';
  for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
    const auto& b = problem.blocks[k];
    os << (k ? " " : "") << (b.diagonal ? -b.size : b.size);
  }
  os << '\n';
  for (int i = 0; i < problem.n_vars; ++i) {
    os << (i ? " " : "") << problem.objective(i);
  }
  os << '\n';
  for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
    const auto& b = problem.blocks[k];
    WriteEntries(os, 0, static_cast<int>(k) + 1, b.constant, b.diagonal);
  }
  // Entries grouped by matrix number, as in the usual SDPA layout.
  std::map<int, std::vector<std::pair<int, const Eigen::MatrixXd*>>> by_var;
  for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
    for (const auto& [i, a] : problem.blocks[k].terms) {
      by_var[i].emplace_back(static_cast<int>(k), &a);
    }
  }
  for (const auto& [i, list] : by_var) {
    for (const auto& [k, a] : list) {
      WriteEntries(os, i + 1, k + 1, *a, problem.blocks[k].diagonal);
    }
  }
  return os.str();
}

void ExportSdpa(const SdpProblem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << FormatSdpa(problem);
  if (!out) throw std::runtime_error("write failed: " + path);
}

SdpProblem ParseSdpa(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  // Header lines, skipping comments ("*" or "\"" prefixed).
  std::vector<std::pair<int, std::string>> header;
  std::vector<std::pair<int, std::string>> body;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (raw[first] == '*' || raw[first] == '"') continue;
    if (header.size() < 4) {
      header.emplace_back(line_no, Clean(raw));
    } else {
      body.emplace_back(line_no, raw);
    }
  }
  if (header.size() < 4) throw SdpaError(line_no, "truncated header");

  SdpProblem p;
  {
    std::istringstream h(header[0].second);
    if (!(h >> p.n_vars) || p.n_vars < 0) {
      throw SdpaError(header[0].first, "bad variable count");
    }
  }
  int nblocks = 0;
  {
    std::istringstream h(header[1].second);
    if (!(h >> nblocks) || nblocks < 0) {
      throw SdpaError(header[1].first, "bad block count");
    }
  }
  {
    std::istringstream h(header[2].second);
    for (int k = 0; k < nblocks; ++k) {
      int s = 0;
      if (!(h >> s) || s == 0) throw SdpaError(header[2].first, "bad block size");
      SdpBlock b;
      b.size = std::abs(s);
      b.diagonal = s < 0;
      b.constant = Eigen::MatrixXd::Zero(b.size, b.size);
      p.blocks.push_back(std::move(b));
    }
  }
  {
    std::istringstream h(header[3].second);
    p.objective = Eigen::VectorXd::Zero(p.n_vars);
    for (int i = 0; i < p.n_vars; ++i) {
      if (!(h >> p.objective(i))) {
        throw SdpaError(header[3].first, "objective vector too short");
      }
    }
  }

  std::vector<std::map<int, Eigen::MatrixXd>> terms(nblocks);
  for (const auto& [ln, text_line] : body) {
    std::istringstream ls(text_line);
    int matno, blkno, i, j;
    double value;
    if (!(ls >> matno >> blkno >> i >> j >> value)) {
      throw SdpaError(ln, "expected 'matno blkno i j value'");
    }
    if (matno < 0 || matno > p.n_vars) throw SdpaError(ln, "matrix number out of range");
    if (blkno < 1 || blkno > nblocks) throw SdpaError(ln, "block number out of range");
    SdpBlock& b = p.blocks[blkno - 1];
    if (i < 1 || j < 1 || i > b.size || j > b.size) {
      throw SdpaError(ln, "entry index out of range");
    }
    if (i > j) throw SdpaError(ln, "entry below the diagonal (i > j)");
    if (b.diagonal && i != j) throw SdpaError(ln, "off-diagonal entry in diagonal block");
    Eigen::MatrixXd* target;
    if (matno == 0) {
      target = &b.constant;
    } else {
      auto [it, inserted] = terms[blkno - 1].try_emplace(matno - 1);
      if (inserted) it->second = Eigen::MatrixXd::Zero(b.size, b.size);
      target = &it->second;
    }
    (*target)(i - 1, j - 1) = value;
    (*target)(j - 1, i - 1) = value;
  }
  for (int k = 0; k < nblocks; ++k) {
    for (auto& [i, a] : terms[k]) p.blocks[k].terms.emplace_back(i, std::move(a));
  }
  p.Validate();
  return p;
}

SdpProblem ImportSdpa(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseSdpa(ss.str());
}

}  // namespace reachsynth
