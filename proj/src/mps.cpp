// MPS (fixed layout) and CPLEX-LP writers, MPS reader.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gtep/error.hpp"
#include "gtep/milp.hpp"

namespace gtep {
namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    if (lower == "inf" || lower == "+inf" || lower == "infinity" || lower == "1e+30" || lower == "1e30")
      return kInf;
    if (lower == "-inf" || lower == "-infinity" || lower == "-1e+30" || lower == "-1e30")
      return -kInf;
    throw ParseError("invalid number '" + std::string(s) + "'", line);
  }
  if (v >= 1e30) return kInf;
  if (v <= -1e30) return -kInf;
  return v;
}

bool fits_mps(std::string_view name) {
  if (name.empty() || name.size() > kMpsNameLimit) return false;
  return std::none_of(name.begin(), name.end(),
                      [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c == '$'; });
}

// Names kept as-is when they fit, otherwise replaced by a salted hash; a
// second pass resolves collisions so the mapping is injective.
std::vector<std::string> assign_short_names(const std::vector<std::string>& names,
                                            std::unordered_set<std::string> taken) {
  std::vector<std::string> out(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (fits_mps(names[k]) && taken.insert(names[k]).second) out[k] = names[k];
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (!out[k].empty()) continue;
    for (int salt = 0;; ++salt) {
      std::string s = mps_short_name(names[k], salt);
      if (taken.insert(s).second) {
        out[k] = std::move(s);
        break;
      }
    }
  }
  return out;
}

std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tok;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tok.push_back(line.substr(start, i - start));
  }
  return tok;
}

}  // namespace

std::string mps_short_name(std::string_view name, int salt) {
  // FNV-1a 64
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  for (int k = 0; k < 4; ++k) {
    h ^= static_cast<std::uint64_t>((salt >> (8 * k)) & 0xff);
    h *= 1099511628211ULL;
  }
  static constexpr char kDigits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string out;
  const char first = name.empty() ? 'X' : name.front();
  out.push_back(std::isalnum(static_cast<unsigned char>(first)) ? first : 'X');
  for (std::size_t k = 1; k < kMpsNameLimit; ++k) {
    out.push_back(kDigits[h % 36]);
    h /= 36;
  }
  return out;
}

MpsText export_mps(const MilpModel& m) {
  std::vector<std::string> col_src, row_src;
  col_src.reserve(m.num_variables());
  row_src.reserve(m.num_constraints());
  for (const auto& v : m.variables()) col_src.push_back(v.name);
  for (const auto& c : m.constraints()) row_src.push_back(c.name);

  MpsText out;
  out.column_names = assign_short_names(col_src, {});
  out.row_names = assign_short_names(row_src, {"OBJ"});

  // column-wise view of the rows
  std::vector<std::vector<std::pair<int, double>>> cols(m.num_variables());
  for (std::size_t i = 0; i < m.num_constraints(); ++i)
    for (const auto& [j, a] : m.constraint(static_cast<int>(i)).row)
      cols[j].emplace_back(static_cast<int>(i), a);

  std::ostringstream os;
  os << "NAME          " << (fits_mps(m.name()) ? m.name() : std::string("GTEP")) << "\n";
  os << "ROWS\n";
  os << " N  OBJ\n";
  for (std::size_t i = 0; i < m.num_constraints(); ++i) {
    const char type = [&] {
      switch (m.constraint(static_cast<int>(i)).sense) {
        case Sense::less_equal: return 'L';
        case Sense::greater_equal: return 'G';
        case Sense::equal: return 'E';
      }
      return 'E';
    }();
    os << ' ' << type << "  " << out.row_names[i] << "\n";
  }

  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  const auto entry = [&](const std::string& col, const std::string& row, double v) {
    os << "    " << pad(col, 8) << "  " << pad(row, 8) << "  " << fmt_double(v) << "\n";
  };
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    const bool is_int = m.variable(static_cast<int>(j)).type == VarType::binary;
    if (is_int != in_int) {
      os << "    MARKER                 'MARKER'                 "
         << (is_int ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = is_int;
      ++marker;
    }
    const std::string& name = out.column_names[j];
    const double c = m.costs()[j];
    if (c != 0.0 || cols[j].empty()) entry(name, "OBJ", c);
    for (const auto& [i, a] : cols[j]) entry(name, out.row_names[i], a);
  }
  if (in_int) os << "    MARKER                 'MARKER'                 'INTEND'\n";

  os << "RHS\n";
  if (m.objective_offset() != 0.0) entry("RHS", "OBJ", -m.objective_offset());
  for (std::size_t i = 0; i < m.num_constraints(); ++i) {
    const double rhs = m.constraint(static_cast<int>(i)).rhs;
    if (rhs != 0.0) entry("RHS", out.row_names[i], rhs);
  }
  os << "RANGES\n";

  os << "BOUNDS\n";
  const auto bound = [&](std::string_view type, const std::string& col) {
    os << ' ' << type << " BND       " << col << "\n";
  };
  const auto bound_v = [&](std::string_view type, const std::string& col, double v) {
    os << ' ' << type << " BND       " << pad(col, 8) << "  " << fmt_double(v) << "\n";
  };
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    const Variable& v = m.variable(static_cast<int>(j));
    const std::string& name = out.column_names[j];
    if (v.type == VarType::binary) {
      // explicit bounds: readers disagree on defaults for marker columns
      if (v.lower == v.upper) {
        bound_v("FX", name, v.lower);
      } else {
        bound_v("LO", name, v.lower);
        bound_v("UP", name, v.upper);
      }
      continue;
    }
    if (v.lower == v.upper) {
      bound_v("FX", name, v.lower);
      continue;
    }
    const bool lo_inf = std::isinf(v.lower);
    const bool hi_inf = std::isinf(v.upper);
    if (lo_inf && hi_inf) {
      bound("FR", name);
      continue;
    }
    if (lo_inf)
      bound("MI", name);
    else if (v.lower != 0.0 || (!hi_inf && v.upper < 0.0))
      bound_v("LO", name, v.lower);
    if (!hi_inf) bound_v("UP", name, v.upper);
  }
  os << "ENDATA\n";
  out.text = os.str();
  return out;
}

MilpModel parse_mps(std::string_view text) {
  enum class Section { none, name, rows, columns, rhs, ranges, bounds, done };
  Section section = Section::none;

  struct RowInfo {
    std::string name;
    Sense sense;
    double rhs = 0.0;
    std::vector<std::pair<int, double>> entries;
  };
  struct ColInfo {
    std::string name;
    bool integer = false;
    double cost = 0.0;
    double lower = 0.0;
    double upper = kInf;
    bool lower_set = false;
    bool upper_set = false;
    bool upper_negative_only = false;
  };

  std::string model_name = "gtep";
  std::string objective_row;
  std::unordered_set<std::string> free_rows;
  std::vector<RowInfo> rows;
  std::unordered_map<std::string, int> row_index;
  std::vector<ColInfo> cols;
  std::unordered_map<std::string, int> col_index;
  double offset = 0.0;
  bool in_int = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size() && section != Section::done) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '*') continue;
    auto tok = tokenize(line);
    if (tok.empty()) continue;

    if (!std::isspace(static_cast<unsigned char>(line.front()))) {
      const std::string_view head = tok[0];
      if (head == "NAME") {
        section = Section::name;
        if (tok.size() > 1) model_name = std::string(tok[1]);
      } else if (head == "ROWS") {
        section = Section::rows;
      } else if (head == "COLUMNS") {
        section = Section::columns;
      } else if (head == "RHS") {
        section = Section::rhs;
      } else if (head == "RANGES") {
        section = Section::ranges;
      } else if (head == "BOUNDS") {
        section = Section::bounds;
      } else if (head == "ENDATA") {
        section = Section::done;
      } else if (head == "OBJSENSE") {
        if (tok.size() > 1 && tok[1] != "MIN" && tok[1] != "MINIMIZE")
          throw ParseError("only minimization is supported", line_no);
      } else {
        throw ParseError("unknown section '" + std::string(head) + "'", line_no);
      }
      continue;
    }

    switch (section) {
      case Section::rows: {
        if (tok.size() != 2) throw ParseError("ROWS entry needs type and name", line_no);
        const std::string name(tok[1]);
        if (tok[0] == "N") {
          if (objective_row.empty()) objective_row = name;
          else free_rows.insert(name);
          continue;
        }
        Sense sense;
        if (tok[0] == "L") sense = Sense::less_equal;
        else if (tok[0] == "G") sense = Sense::greater_equal;
        else if (tok[0] == "E") sense = Sense::equal;
        else throw ParseError("unknown row type '" + std::string(tok[0]) + "'", line_no);
        if (!row_index.emplace(name, static_cast<int>(rows.size())).second)
          throw ParseError("duplicate row '" + name + "'", line_no);
        rows.push_back({name, sense, 0.0, {}});
        break;
      }
      case Section::columns: {
        if (tok.size() >= 3 && tok[1] == "'MARKER'") {
          if (tok[2] == "'INTORG'") in_int = true;
          else if (tok[2] == "'INTEND'") in_int = false;
          else throw ParseError("unknown marker", line_no);
          continue;
        }
        if (tok.size() != 3 && tok.size() != 5)
          throw ParseError("COLUMNS entry has " + std::to_string(tok.size()) + " fields", line_no);
        const std::string cname(tok[0]);
        auto [it, fresh] = col_index.emplace(cname, static_cast<int>(cols.size()));
        if (fresh) {
          ColInfo c;
          c.name = cname;
          c.integer = in_int;
          if (in_int) c.upper = 1.0;
          cols.push_back(std::move(c));
        }
        const int j = it->second;
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const std::string rname(tok[k]);
          const double v = parse_double(tok[k + 1], line_no);
          if (rname == objective_row) {
            cols[j].cost += v;
          } else if (free_rows.contains(rname)) {
            continue;
          } else {
            auto r = row_index.find(rname);
            if (r == row_index.end()) throw ParseError("unknown row '" + rname + "'", line_no);
            rows[r->second].entries.emplace_back(j, v);
          }
        }
        break;
      }
      case Section::rhs: {
        std::size_t k = (tok.size() % 2 == 1) ? 1 : 0;  // optional set name
        for (; k + 1 < tok.size(); k += 2) {
          const std::string rname(tok[k]);
          const double v = parse_double(tok[k + 1], line_no);
          if (rname == objective_row) {
            offset = -v;
          } else if (!free_rows.contains(rname)) {
            auto r = row_index.find(rname);
            if (r == row_index.end()) throw ParseError("unknown row '" + rname + "'", line_no);
            rows[r->second].rhs = v;
          }
        }
        break;
      }
      case Section::ranges:
        throw ParseError("ranged rows are not supported", line_no);
      case Section::bounds: {
        const std::string_view type = tok[0];
        const bool valueless = type == "FR" || type == "MI" || type == "PL" || type == "BV";
        const std::size_t expect_with_set = valueless ? 3 : 4;
        std::size_t ci;
        if (tok.size() == expect_with_set) ci = 2;
        else if (tok.size() == expect_with_set - 1) ci = 1;
        else throw ParseError("malformed BOUNDS entry", line_no);
        auto c = col_index.find(std::string(tok[ci]));
        if (c == col_index.end())
          throw ParseError("unknown column '" + std::string(tok[ci]) + "'", line_no);
        ColInfo& col = cols[c->second];
        const double v = valueless ? 0.0 : parse_double(tok[ci + 1], line_no);
        if (type == "UP" || type == "UI") {
          col.upper = v;
          col.upper_set = true;
          if (v < 0.0 && !col.lower_set) col.upper_negative_only = true;
        } else if (type == "LO" || type == "LI") {
          col.lower = v;
          col.lower_set = true;
          col.upper_negative_only = false;
        } else if (type == "FX") {
          col.lower = col.upper = v;
          col.lower_set = col.upper_set = true;
        } else if (type == "FR") {
          col.lower = -kInf;
          col.upper = kInf;
          col.lower_set = col.upper_set = true;
        } else if (type == "MI") {
          col.lower = -kInf;
          col.lower_set = true;
        } else if (type == "PL") {
          col.upper = kInf;
          col.upper_set = true;
        } else if (type == "BV") {
          col.integer = true;
          col.lower = 0.0;
          col.upper = 1.0;
          col.lower_set = col.upper_set = true;
        } else {
          throw ParseError("unknown bound type '" + std::string(type) + "'", line_no);
        }
        break;
      }
      case Section::name:
      case Section::none:
      case Section::done:
        throw ParseError("data outside a section", line_no);
    }
  }
  if (section != Section::done) throw ParseError("missing ENDATA", line_no);

  MilpModel m(model_name);
  for (const ColInfo& c : cols) {
    double lower = c.lower;
    if (c.upper_negative_only) lower = -kInf;
    if (c.integer && (lower < 0.0 || c.upper > 1.0))
      throw ParseError("general integer column '" + c.name + "' is not supported");
    m.add_variable(c.name, lower, c.upper, c.integer ? VarType::binary : VarType::continuous,
                   c.cost);
  }
  for (RowInfo& r : rows) {
    std::vector<Term> terms;
    terms.reserve(r.entries.size());
    for (const auto& [j, a] : r.entries) terms.push_back({VarId{j}, a});
    m.add_constraint(r.name, terms, r.sense, r.rhs);
  }
  m.set_objective_offset(offset);
  return m;
}

namespace {

std::string lp_name(std::string_view name) {
  static const std::string kAllowed = "!\"#$%&()/,.;?@_`'{}|~";
  std::string out;
  out.reserve(name.size() + 1);
  for (char c : name) {
    if (c == '[') out.push_back('(');
    else if (c == ']') out.push_back(')');
    else if (std::isalnum(static_cast<unsigned char>(c)) || kAllowed.find(c) != std::string::npos)
      out.push_back(c);
    else
      out.push_back('_');
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.' ||
      out.front() == 'e' || out.front() == 'E')
    out.insert(out.begin(), '_');
  return out;
}

std::vector<std::string> unique_lp_names(const std::vector<std::string>& names,
                                         std::unordered_set<std::string>& taken) {
  std::vector<std::string> out;
  out.reserve(names.size());
  for (const auto& n : names) {
    std::string base = lp_name(n);
    std::string cand = base;
    for (int k = 1; !taken.insert(cand).second; ++k) cand = base + "#" + std::to_string(k);
    out.push_back(std::move(cand));
  }
  return out;
}

class LineWriter {
 public:
  explicit LineWriter(std::ostringstream& os) : os_(os) {}
  void token(const std::string& t) {
    if (width_ + t.size() + 1 > 250) {
      os_ << "\n   ";
      width_ = 3;
    }
    os_ << ' ' << t;
    width_ += t.size() + 1;
  }
  void start(const std::string& s) {
    os_ << s;
    width_ = s.size();
  }
  void end() { os_ << "\n"; }

 private:
  std::ostringstream& os_;
  std::size_t width_ = 0;
};

void write_terms(LineWriter& w, const std::vector<std::pair<int, double>>& terms,
                 const std::vector<std::string>& names) {
  bool first = true;
  for (const auto& [j, a] : terms) {
    if (first) {
      w.token((a < 0 ? "-" : "") + fmt_double(std::abs(a)) + " " + names[j]);
    } else {
      w.token(a < 0 ? "-" : "+");
      w.token(fmt_double(std::abs(a)) + " " + names[j]);
    }
    first = false;
  }
  if (first && !names.empty()) w.token("0 " + names[0]);
}

}  // namespace

std::string export_lp(const MilpModel& m) {
  std::unordered_set<std::string> taken;
  std::vector<std::string> src;
  for (const auto& v : m.variables()) src.push_back(v.name);
  const auto cols = unique_lp_names(src, taken);
  src.clear();
  for (const auto& c : m.constraints()) src.push_back(c.name);
  taken.insert("obj");
  const auto rows = unique_lp_names(src, taken);

  std::ostringstream os;
  LineWriter w(os);
  os << "\\ Problem: " << m.name() << "\n";
  os << "Minimize\n";
  w.start(" obj:");
  std::vector<std::pair<int, double>> obj;
  for (std::size_t j = 0; j < m.num_variables(); ++j)
    if (m.costs()[j] != 0.0) obj.emplace_back(static_cast<int>(j), m.costs()[j]);
  write_terms(w, obj, cols);
  if (m.objective_offset() != 0.0) {
    const double c = m.objective_offset();
    if (!obj.empty() || !cols.empty()) w.token(c < 0 ? "-" : "+");
    w.token(fmt_double(std::abs(c)));
  }
  w.end();

  os << "Subject To\n";
  for (std::size_t i = 0; i < m.num_constraints(); ++i) {
    const Constraint& c = m.constraint(static_cast<int>(i));
    w.start(" " + rows[i] + ":");
    write_terms(w, c.row, cols);
    const char* op = c.sense == Sense::less_equal ? "<=" : c.sense == Sense::greater_equal ? ">=" : "=";
    w.token(op);
    w.token(fmt_double(c.rhs));
    w.end();
  }

  os << "Bounds\n";
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    const Variable& v = m.variable(static_cast<int>(j));
    const std::string& n = cols[j];
    if (v.type == VarType::binary && v.lower == 0.0 && v.upper == 1.0) continue;
    if (v.lower == v.upper) {
      os << " " << n << " = " << fmt_double(v.lower) << "\n";
    } else if (std::isinf(v.lower) && std::isinf(v.upper)) {
      os << " " << n << " free\n";
    } else if (std::isinf(v.lower)) {
      os << " -inf <= " << n << " <= " << fmt_double(v.upper) << "\n";
    } else if (std::isinf(v.upper)) {
      if (v.lower != 0.0) os << " " << n << " >= " << fmt_double(v.lower) << "\n";
    } else {
      os << " " << fmt_double(v.lower) << " <= " << n << " <= " << fmt_double(v.upper) << "\n";
    }
  }
  if (m.num_binaries() > 0) {
    os << "Binaries\n";
    for (std::size_t j = 0; j < m.num_variables(); ++j)
      if (m.variable(static_cast<int>(j)).type == VarType::binary) os << " " << cols[j] << "\n";
  }
  os << "End\n";
  return os.str();
}

}  // namespace gtep
