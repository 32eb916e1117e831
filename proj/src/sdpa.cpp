#include "edgeloc/sdpa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "edgeloc/cones.hpp"

namespace edgeloc {

namespace {

const double kSqrt2 = std::sqrt(2.0);

struct EntryTarget {
  int block = 0;   // 1-based SDPA block
  int i = 0;       // 1-based row within the block, i <= j
  int j = 0;
  double scale = 1.0;  // divides the svec coefficient for off-diagonals
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_sdpa(const ConicProgram& prog, std::ostream& os) {
  prog.validate();
  const Eigen::Index m = prog.rows(), n = prog.cols();
  const ConeLayout& cones = prog.cones;

  std::vector<int> blockstruct;
  int zero_block = 0, nonneg_block = 0;
  if (cones.zero > 0) {
    zero_block = static_cast<int>(blockstruct.size()) + 1;
    blockstruct.push_back(-2 * static_cast<int>(cones.zero));
  }
  if (cones.nonneg > 0) {
    nonneg_block = static_cast<int>(blockstruct.size()) + 1;
    blockstruct.push_back(-static_cast<int>(cones.nonneg));
  }
  const int first_psd_block = static_cast<int>(blockstruct.size()) + 1;
  for (int dim : cones.psd) blockstruct.push_back(dim);

  // row -> one or two LMI entries (zero-cone rows expand to a +/- pair)
  std::vector<std::vector<EntryTarget>> targets(m);
  for (Eigen::Index r = 0; r < cones.zero; ++r) {
    targets[r].push_back({zero_block, static_cast<int>(2 * r + 1),
                          static_cast<int>(2 * r + 1), 1.0});
    targets[r].push_back({zero_block, static_cast<int>(2 * r + 2),
                          static_cast<int>(2 * r + 2), -1.0});
  }
  for (Eigen::Index t = 0; t < cones.nonneg; ++t) {
    const Eigen::Index r = cones.zero + t;
    targets[r].push_back(
        {nonneg_block, static_cast<int>(t + 1), static_cast<int>(t + 1), 1.0});
  }
  for (std::size_t blk = 0; blk < cones.psd.size(); ++blk) {
    const int dim = cones.psd[blk];
    Eigen::Index r = cones.psd_start(blk);
    for (int c = 0; c < dim; ++c) {
      for (int rr = 0; rr <= c; ++rr, ++r) {
        targets[r].push_back({first_psd_block + static_cast<int>(blk), rr + 1, c + 1,
                              rr == c ? 1.0 : kSqrt2});
      }
    }
  }

  os << "\"edgeloc conic program export\"\n";
  os << n << " = mDIM\n";
  os << blockstruct.size() << " = nBLOCK\n";
  for (std::size_t t = 0; t < blockstruct.size(); ++t)
    os << blockstruct[t] << (t + 1 < blockstruct.size() ? " " : "");
  os << "\n";
  for (Eigen::Index k = 0; k < n; ++k)
    os << fmt(prog.c[k]) << (k + 1 < n ? " " : "");
  os << "\n";

  struct Line {
    int block, i, j;
    double value;
  };
  auto emit = [&os](int matno, std::vector<Line>& lines) {
    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
      return std::tie(a.block, a.i, a.j) < std::tie(b.block, b.i, b.j);
    });
    for (const Line& l : lines)
      os << matno << " " << l.block << " " << l.i << " " << l.j << " "
         << fmt(l.value) << "\n";
  };

  // F0 = -mat(b):  X(y) = mat(-Ay) + mat(b)
  std::vector<Line> lines;
  for (Eigen::Index r = 0; r < m; ++r) {
    if (prog.b[r] == 0.0) continue;
    for (const EntryTarget& t : targets[r])
      lines.push_back({t.block, t.i, t.j, -prog.b[r] / t.scale});
  }
  emit(0, lines);

  for (Eigen::Index k = 0; k < n; ++k) {
    lines.clear();
    for (Eigen::SparseMatrix<double>::InnerIterator it(prog.A, k); it; ++it) {
      if (it.value() == 0.0) continue;
      for (const EntryTarget& t : targets[it.row()])
        lines.push_back({t.block, t.i, t.j, -it.value() / t.scale});
    }
    emit(static_cast<int>(k) + 1, lines);
  }
}

void write_sdpa(const ConicProgram& prog, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_sdpa(prog, out);
}

}  // namespace edgeloc
