#include "srnbound/chain_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>
#include <sstream>

#include "srnbound/errors.hpp"

namespace srnbound {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t\r");
    const auto e = item.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

double to_double(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("chain CSV line " + std::to_string(line_no) + ": bad number '" + s +
                          "'");
  }
}

}  // namespace

void write_chain_csv(const BoundingChain& chain, std::ostream& out) {
  const int J = chain.max_jump();
  out << "# direction=" << to_string(chain.direction()) << "\n";
  out << "# max_jump=" << J << "\n";
  out << "# l_exact=" << chain.l_exact() << "\n";
  out << "# l_total=" << chain.l_total() << "\n";
  out << "ell,offset,rate\n";
  for (ClassIndex l = 0; l <= chain.l_exact(); ++l) {
    for (int k = -J; k <= J; ++k) {
      if (k == 0) continue;
      const double v = chain.rate(l, k);
      if (v != 0.0) out << l << ',' << k << ',' << num(v) << "\n";
    }
  }
  out << "\noffset,slope,intercept,onset,period,residue,quadratic,cubic\n";
  for (const RateTail& t : chain.tails()) {
    for (int r = 0; r < t.period; ++r) {
      const auto& c = t.coefficients[r];
      out << t.offset << ',' << num(c[1]) << ',' << num(c[0]) << ',' << t.onset << ','
          << t.period << ',' << r << ',' << num(c[2]) << ',' << num(c[3]) << "\n";
    }
  }
}

void write_chain_csv(const BoundingChain& chain, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write chain CSV '" + path.string() + "'");
  write_chain_csv(chain, out);
}

BoundingChain read_chain_csv(std::istream& in) {
  std::map<std::string, std::string> meta;
  std::string line;
  int line_no = 0;
  enum { kMeta, kRates, kTails } section = kMeta;
  std::vector<std::tuple<ClassIndex, int, double>> entries;
  std::map<int, RateTail> tails;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        auto key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        meta[key] = line.substr(eq + 1);
      }
      continue;
    }
    if (line.rfind("ell,", 0) == 0) {
      section = kRates;
      continue;
    }
    if (line.rfind("offset,", 0) == 0) {
      section = kTails;
      continue;
    }
    const auto f = split(line);
    if (section == kRates) {
      if (f.size() != 3) throw ValidationError("chain CSV line " + std::to_string(line_no) +
                                               ": expected ell,offset,rate");
      entries.emplace_back(static_cast<ClassIndex>(to_double(f[0], line_no)),
                           static_cast<int>(to_double(f[1], line_no)), to_double(f[2], line_no));
    } else if (section == kTails) {
      if (f.size() < 4) throw ValidationError("chain CSV line " + std::to_string(line_no) +
                                              ": expected offset,slope,intercept,onset");
      const int offset = static_cast<int>(to_double(f[0], line_no));
      RateTail& t = tails[offset];
      t.offset = offset;
      t.onset = static_cast<ClassIndex>(to_double(f[3], line_no));
      t.period = f.size() > 4 ? static_cast<int>(to_double(f[4], line_no)) : 1;
      const int residue = f.size() > 5 ? static_cast<int>(to_double(f[5], line_no)) : 0;
      if (t.period < 1 || residue < 0 || residue >= t.period) {
        throw ValidationError("chain CSV line " + std::to_string(line_no) + ": bad residue");
      }
      t.coefficients.resize(t.period, {0, 0, 0, 0});
      auto& c = t.coefficients[residue];
      c[1] = to_double(f[1], line_no);
      c[0] = to_double(f[2], line_no);
      c[2] = f.size() > 6 ? to_double(f[6], line_no) : 0.0;
      c[3] = f.size() > 7 ? to_double(f[7], line_no) : 0.0;
    } else {
      throw ValidationError("chain CSV line " + std::to_string(line_no) + ": data before header");
    }
  }

  auto need = [&](const char* key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw ValidationError(std::string("chain CSV lacks '") + key + "'");
    return it->second;
  };
  const Direction dir = parse_direction(need("direction"));
  const int J = std::stoi(need("max_jump"));
  const ClassIndex l_exact = std::stoll(need("l_exact"));
  const ClassIndex l_total = std::stoll(need("l_total"));
  if (J < 1 || l_exact < 0) throw ValidationError("chain CSV: bad metadata");

  std::vector<double> rates(static_cast<std::size_t>(l_exact + 1) * 2 * J, 0.0);
  for (const auto& [l, k, v] : entries) {
    if (l < 0 || l > l_exact || k == 0 || std::abs(k) > J) {
      throw ValidationError("chain CSV: entry (" + std::to_string(l) + "," + std::to_string(k) +
                            ") outside band");
    }
    rates[static_cast<std::size_t>(l) * 2 * J + BoundingChain::slot(k, J)] = v;
  }
  std::vector<RateTail> tail_list;
  for (auto& [offset, t] : tails) {
    t.degree = 0;
    for (const auto& c : t.coefficients) {
      for (int d = 3; d > t.degree; --d) {
        if (c[d] != 0.0) t.degree = d;
      }
    }
    tail_list.push_back(t);
  }
  return BoundingChain(dir, J, l_exact, l_total, std::move(rates), std::move(tail_list));
}

BoundingChain read_chain_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open chain CSV '" + path.string() + "'");
  return read_chain_csv(in);
}

}  // namespace srnbound
