// SPDX-License-Identifier: Apache-2.0
#include "denslift/cli.hpp"

#include <CLI11.hpp>
#include <cctype>
#include <iostream>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "denslift/equivariance.hpp"
#include "denslift/errors.hpp"

namespace denslift {

VolumeForm SessionConfig::volume_form() const {
  if (volume == "coordinate") return VolumeForm::coordinate();
  if (volume == "generic") return VolumeForm::generic();
  throw Error("unknown volume form '" + volume + "'");
}

namespace {

enum class Mode { Operator, Function, Symbol };

class Parser {
 public:
  Parser(std::string_view src, const SessionConfig& cfg, Mode mode) : src_(src), cfg_(cfg), mode_(mode) {}

  DensityOperator run() {
    DensityOperator out = expr();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, pos_); }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_space();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool starts_factor() {
    skip_space();
    if (pos_ >= src_.size()) return false;
    const char c = src_[pos_];
    return std::isalnum(static_cast<unsigned char>(c)) || c == '(';
  }

  DensityOperator product(const DensityOperator& a, const DensityOperator& b) const {
    if (mode_ == Mode::Symbol) return compose(a, b, [](const DiffPolynomial&, int) { return DiffPolynomial(); });
    return compose(a, b);
  }

  DensityOperator constant(const DiffPolynomial& f) const { return DensityOperator::multiplication(cfg_.dim, f); }

  DensityOperator expr() {
    DensityOperator out(cfg_.dim);
    bool negate = false;
    if (peek('+')) {
      ++pos_;
    } else if (peek('-')) {
      ++pos_;
      negate = true;
    }
    for (;;) {
      DensityOperator t = term();
      out += negate ? -t : t;
      if (peek('+')) {
        ++pos_;
        negate = false;
      } else if (peek('-')) {
        ++pos_;
        negate = true;
      } else {
        return out;
      }
    }
  }

  DensityOperator term() {
    DensityOperator out = factor();
    for (;;) {
      if (peek('*')) {
        ++pos_;
        out = product(out, factor());
      } else if (peek('/')) {
        ++pos_;
        const std::size_t at = pos_;
        const DensityOperator d = factor();
        const DiffPolynomial c = d.coefficient(0, MultiIndex{});
        if (d.terms().size() != 1 || !c.is_scalar() || c.scalar_value().is_zero()) {
          pos_ = at;
          fail("division by a non-scalar");
        }
        out = out.scaled(c.scalar_value().inverse());
      } else if (starts_factor()) {
        out = product(out, factor());
      } else {
        return out;
      }
    }
  }

  DensityOperator factor() {
    DensityOperator base = atom();
    if (!peek('^')) return base;
    ++pos_;
    skip_space();
    const unsigned e = integer();
    DensityOperator out = constant(DiffPolynomial(1));
    for (unsigned k = 0; k < e; ++k) out = product(out, base);
    return out;
  }

  unsigned integer() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an integer");
    if (pos_ - start > 6) fail("integer too large");
    return static_cast<unsigned>(std::stoul(std::string(src_.substr(start, pos_ - start))));
  }

  int axis_index() {
    const std::size_t at = pos_;
    const unsigned i = integer();
    if (i < 1 || static_cast<int>(i) > cfg_.dim) {
      pos_ = at;
      throw IndexOutOfRange("index " + std::to_string(i) + " outside 1.." + std::to_string(cfg_.dim) + " at offset " +
                            std::to_string(at));
    }
    return static_cast<int>(i);
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) ||
          (c == '_' && pos_ + 1 < src_.size() && src_[pos_ + 1] != ',')) {
        ++pos_;
        continue;
      }
      break;
    }
    return std::string(src_.substr(start, pos_ - start));
  }

  static bool is_indexed(const std::string& name, std::string_view prefix) {
    if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return false;
    for (std::size_t k = prefix.size(); k < name.size(); ++k)
      if (!std::isdigit(static_cast<unsigned char>(name[k]))) return false;
    return true;
  }

  // Generator index for "D<i>" (operators) or "xi"/"xi<i>" (symbols).
  std::optional<int> generator(const std::string& name, std::size_t at) {
    const std::string_view prefix = mode_ == Mode::Symbol ? "xi" : "D";
    int axis = 0;
    if (mode_ == Mode::Symbol && name == "xi") {
      if (cfg_.dim != 1) {
        pos_ = at;
        fail("use xi1..xi" + std::to_string(cfg_.dim) + " in dimension > 1");
      }
      axis = 1;
    } else if (is_indexed(name, prefix)) {
      axis = std::stoi(name.substr(prefix.size()));
    } else {
      return std::nullopt;
    }
    if (mode_ == Mode::Function) {
      pos_ = at;
      fail("derivative generator in a coefficient");
    }
    if (axis < 1 || axis > cfg_.dim)
      throw IndexOutOfRange("generator " + name + " outside 1.." + std::to_string(cfg_.dim) + " at offset " +
                            std::to_string(at));
    return axis;
  }

  DensityOperator atom() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const std::size_t at = pos_;
    const char c = src_[pos_];
    DensityOperator out(cfg_.dim);
    if (c == '(') {
      ++pos_;
      out = expr();
      if (!peek(')')) fail("expected ')'");
      ++pos_;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      out = constant(DiffPolynomial(Scalar(Rational(std::string(src_.substr(start, pos_ - start))))));
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::string name = identifier();
      if (auto axis = generator(name, at)) return DensityOperator::partial(cfg_.dim, *axis);
      if (name == "L" && mode_ == Mode::Operator) return DensityOperator::weight(cfg_.dim);
      if (name == "L") {
        pos_ = at;
        fail("weight operator not allowed here");
      }
      if (cfg_.params.count(name)) {
        out = constant(DiffPolynomial(Scalar::param(name)));
      } else {
        std::vector<int> upper;
        if (peek('[')) {
          ++pos_;
          for (;;) {
            skip_space();
            upper.push_back(axis_index());
            if (peek(',')) {
              ++pos_;
              continue;
            }
            if (!peek(']')) fail("expected ']'");
            ++pos_;
            break;
          }
        }
        out = constant(jet(name, upper));
      }
    } else {
      fail("unexpected '" + std::string(1, c) + "'");
    }
    // derivative suffixes
    while (pos_ + 1 < src_.size() && src_[pos_] == '_' && src_[pos_ + 1] == ',') {
      pos_ += 2;
      const int axis = axis_index();
      if (!out.is_vertical() || out.has_weight()) {
        pos_ = at;
        fail("derivative suffix on an operator");
      }
      out = constant(derive(out.coefficient(0, MultiIndex{}), axis));
    }
    return out;
  }

  std::string_view src_;
  const SessionConfig& cfg_;
  Mode mode_;
  std::size_t pos_ = 0;
};

using nlohmann::json;

void collect(const Scalar& s, std::set<std::string>& out) {
  for (const Poly* p : {&s.num(), &s.den()})
    for (const auto& [m, c] : p->terms())
      for (const auto& pw : m) out.insert(ParamRegistry::instance().name(pw.var));
}

void collect(const DiffPolynomial& f, std::set<std::string>& out) {
  for (const auto& [m, c] : f.terms()) collect(c, out);
}

json multi_index_json(const MultiIndex& alpha, int dim) {
  json out = json::array();
  for (int i = 0; i < dim; ++i) out.push_back(alpha[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

DensityOperator parse_operator(std::string_view src, const SessionConfig& cfg) {
  return Parser(src, cfg, Mode::Operator).run();
}

DiffPolynomial parse_function(std::string_view src, const SessionConfig& cfg) {
  return Parser(src, cfg, Mode::Function).run().coefficient(0, MultiIndex{});
}

SymbolPoly parse_symbol(std::string_view src, const SessionConfig& cfg) {
  const DensityOperator op = Parser(src, cfg, Mode::Symbol).run();
  SymbolPoly out(cfg.dim);
  for (const auto& [k, c] : op.terms()) out.add_term(k.alpha, c);
  return out;
}

std::set<std::string> parameters_of(const DensityOperator& op) {
  std::set<std::string> out;
  for (const auto& [k, c] : op.terms()) collect(c, out);
  return out;
}

std::string operator_to_json(const DensityOperator& op) {
  json terms = json::array();
  for (const auto& [k, c] : op.terms())
    terms.push_back({{"lpow", k.r}, {"dmulti", multi_index_json(k.alpha, op.dim())}, {"coeff", c.to_string()}});
  json out = {{"schema", "denslift/1"},
              {"dim", op.dim()},
              {"order", op.is_zero() ? json(nullptr) : json(op.total_order())},
              {"params", parameters_of(op)},
              {"terms", terms}};
  return out.dump();
}

DensityOperator operator_from_json(std::string_view text, const SessionConfig& cfg) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SyntaxError(std::string("invalid JSON: ") + e.what(), e.byte);
  }
  if (!in.is_object() || in.value("schema", "") != "denslift/1") throw SyntaxError("not a denslift/1 document", 0);
  SessionConfig local = cfg;
  local.dim = in.at("dim").get<int>();
  for (const auto& p : in.value("params", json::array())) local.params.insert(p.get<std::string>());
  DensityOperator out(local.dim);
  for (const auto& t : in.at("terms")) {
    MultiIndex alpha{};
    const auto& d = t.at("dmulti");
    if (static_cast<int>(d.size()) != local.dim) throw SyntaxError("dmulti has the wrong length", 0);
    for (std::size_t i = 0; i < d.size(); ++i) alpha[i] = d[i].get<std::uint8_t>();
    out.add_term(t.at("lpow").get<unsigned>(), alpha, parse_function(t.at("coeff").get<std::string>(), local));
  }
  return out;
}

std::string symbol_to_json(const SymbolPoly& p) {
  json terms = json::array();
  std::set<std::string> params;
  for (const auto& [xi, c] : p.terms()) {
    terms.push_back({{"xi", multi_index_json(xi, p.dim())}, {"coeff", c.to_string()}});
    collect(c, params);
  }
  json out = {{"schema", "denslift/1"},
              {"dim", p.dim()},
              {"degree", p.is_zero() ? json(nullptr) : json(p.degree())},
              {"params", params},
              {"terms", terms}};
  return out.dump();
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

struct Command {
  SessionConfig cfg;
  std::vector<std::string> operands;
  std::ostream& out;

  std::string operand(std::size_t k) const {
    if (k >= operands.size()) throw SyntaxError("missing operand " + std::to_string(k + 1), 0);
    if (operands[k] != "-") return operands[k];
    std::string text((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    return text;
  }

  DensityOperator op(std::size_t k) const {
    const std::string text = operand(k);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') return parse_operator(text, cfg);
    DensityOperator a = operator_from_json(text, cfg);
    if (a.dim() != cfg.dim) throw IndexOutOfRange("operand dimension " + std::to_string(a.dim()) + " differs from --dim");
    return a;
  }

  DensityOperator bind(const DensityOperator& a) const {
    DensityOperator r = a;
    for (const auto& [name, v] : cfg.bindings) r = substitute_params(r, name, v);
    return r;
  }

  DiffPolynomial bind(const DiffPolynomial& a) const {
    DiffPolynomial r = a;
    for (const auto& [name, v] : cfg.bindings) r = substitute_params(r, name, v);
    return r;
  }

  Scalar knob(const std::string& name) const {
    auto it = cfg.bindings.find(name);
    return it == cfg.bindings.end() ? Scalar::param(name) : it->second;
  }

  void emit(const DensityOperator& a) const {
    const DensityOperator r = bind(a);
    out << (cfg.json ? operator_to_json(r) : to_string(r)) << "\n";
  }

  void emit(const DiffPolynomial& f) const {
    const DiffPolynomial r = bind(f);
    if (cfg.json)
      out << nlohmann::json{{"schema", "denslift/1"}, {"function", r.to_string()}}.dump() << "\n";
    else
      out << r.to_string() << "\n";
  }

  void emit(const SymbolPoly& p) const {
    SymbolPoly r(p.dim());
    for (const auto& [xi, c] : p.terms()) r.add_term(xi, bind(c));
    out << (cfg.json ? symbol_to_json(r) : to_string(r)) << "\n";
  }

  void report(const std::string& name, bool pass, const std::string& counterexample) const {
    if (cfg.json) {
      nlohmann::json j = {{"schema", "denslift/1"}, {"check", name}, {"result", pass ? "PASS" : "FAIL"}};
      if (!pass) j["counterexample"] = counterexample;
      out << j.dump() << "\n";
    } else {
      out << (pass ? "PASS" : "FAIL: " + counterexample) << "\n";
    }
  }

  void report_residual(const std::string& name, const DensityOperator& residual) const {
    if (residual.is_zero()) return report(name, true, "");
    const auto& [k, c] = *residual.terms().begin();
    report(name, false, to_string(DensityOperator::term(residual.dim(), k.r, k.alpha, c)));
  }
};

VolLiftParams vol_params(const Command& cmd, int n) {
  VolLiftParams p;
  p.b = cmd.knob("b");
  for (int k = 1; k <= n; ++k) {
    p.c.push_back(cmd.knob("c" + std::to_string(k)));
    p.d.push_back(cmd.knob("d" + std::to_string(k)));
  }
  return p;
}

void run_lift(const Command& cmd, const std::string& kind) {
  const DensityOperator delta = cmd.op(0);
  const Scalar l0 = cmd.cfg.lambda0_value();
  const VolumeForm rho = cmd.cfg.volume_form();
  if (kind == "canonical") return cmd.emit(canonical_lift(delta, l0, rho));
  if (kind == "vol") {
    const int n = delta.is_zero() ? 0 : delta.total_order();
    return cmd.emit(vol_lift(delta, l0, rho, vol_params(cmd, n)));
  }
  if (kind == "distinguished") return cmd.emit(distinguished_lift(delta, l0, rho));
  if (kind == "first") return cmd.emit(first_order_lift(delta, l0, cmd.knob("c")));
  if (kind == "second") return cmd.emit(second_order_canonical_lift(delta, l0));
  if (kind == "proj") return cmd.emit(proj_lift(delta, l0));
  throw SyntaxError("unknown lift '" + kind + "'", 0);
}

void run_check(const Command& cmd, const std::string& name) {
  const Scalar l0 = cmd.cfg.lambda0_value();
  const int dim = cmd.cfg.dim;
  if (name == "adjoint-involution") {
    const DensityOperator a = cmd.op(0);
    return cmd.report_residual(name, adjoint(adjoint(a)) - a);
  }
  if (name == "selfadjoint") {
    const DensityOperator a = cmd.op(0);
    if (a.is_zero()) return cmd.report(name, true, "");
    const DensityOperator as = adjoint(a);
    return cmd.report_residual(name, a.total_order() % 2 ? as + a : as - a);
  }
  if (name == "equivariance") {
    const DensityOperator a = cmd.op(0);
    for (const VectorField& x : proj_generators(dim)) {
      const SymbolPoly defect = proj_equivariance_defect(a, l0, x);
      if (!defect.is_zero()) return cmd.report(name, false, to_string(defect));
    }
    return cmd.report(name, true, "");
  }
  if (name == "variation") {
    const DensityOperator a = cmd.op(0);
    VectorField x;
    for (int i = 1; i <= dim; ++i) x.push_back(jet("X", {i}));
    const LiftingHandle lift = LiftingHandle::canonical(l0, cmd.cfg.volume_form());
    return cmd.report_residual(name, ad_on_lifting(lift, a, x) -
                                         volume_variation(lift, a, divergence(x, cmd.cfg.volume_form())));
  }
  if (name == "sdiff-classify") {
    auto value = [&](const std::string& k, long dflt) {
      auto it = cmd.cfg.bindings.find(k);
      return it == cmd.cfg.bindings.end() ? Scalar(dflt) : it->second;
    };
    const SdiffMapCoeffs f{value("a1", 1), value("a2", 0), value("a3", 0),
                           value("b1", 1), value("b2", 0), value("c", 1)};
    return cmd.report_residual(name, classify_sdiff_map(f, dim));
  }
  if (name == "regular") {
    const DensityOperator delta = cmd.op(0);
    const DensityOperator lift = cmd.op(1);
    const DensityOperator back = restrict(lift, l0) - delta;
    if (!back.is_zero()) return cmd.report_residual(name, back);
    const int n = delta.is_zero() ? 0 : delta.total_order();
    return cmd.report(name, is_regular_pair(delta, lift, n), "total order exceeds " + std::to_string(n));
  }
  if (name == "cocycle") {
    const DensityOperator a = cmd.op(0);
    const DiffeoJet1D phi = DiffeoJet1D::generic();
    const bool pass = schwarzian_cocycle_check(a, l0, phi);
    const DiffPolynomial shift = schwarzian_transform(a, l0, phi) - phi.finish(schwarzian_data(a, l0));
    cmd.report(name, pass, "transformed S - S = " + shift.to_string());
    if (!cmd.cfg.json)
      cmd.out << "function law S - (2/3) Sch a: " << (schwarzian_function_law_check(a, l0, phi) ? "PASS" : "FAIL")
              << "\n";
    return;
  }
  throw SyntaxError("unknown check '" + name + "'", 0);
}

std::map<std::string, Scalar> parse_bindings(const std::string& text) {
  std::map<std::string, Scalar> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw SyntaxError("expected name=value in --params", 0);
    try {
      out[item.substr(0, eq)] = Scalar::parse_rational(item.substr(eq + 1));
    } catch (const Error&) {
      throw SyntaxError("bad value in --params: " + item, 0);
    }
  }
  return out;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact calculus of differential operators on densities", "denslift"};
  app.require_subcommand(1);
  SessionConfig cfg;
  std::string lambda0 = "symbolic", params, symbols;
  app.add_option("--dim", cfg.dim, "manifold dimension")->check(CLI::Range(1, kMaxDim));
  app.add_option("--lambda0", lambda0, "base weight: p/q or 'symbolic'");
  app.add_option("--volume", cfg.volume, "volume form")->check(CLI::IsMember({"coordinate", "generic"}));
  app.add_option("--params", params, "bindings name=value,...");
  app.add_option("--symbols", symbols, "extra formal parameter names, comma separated");
  app.add_flag("--json", cfg.json, "JSON output");

  std::vector<std::string> operands;
  std::string kind;
  auto add = [&](const std::string& name, const std::string& help, bool with_kind) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    if (with_kind) sub->add_option("kind", kind)->required();
    sub->add_option("operands", operands);
    return sub;
  };
  add("adjoint", "formal adjoint", false);
  add("compose", "composition of two operators", false);
  add("lift", "lift {canonical|vol|distinguished|first|second|proj}", true);
  add("taylor", "Taylor coefficients around lambda0", false);
  add("assemble", "operator from Taylor coefficients", false);
  add("symbol", "projectively equivariant full symbol", false);
  add("quantize", "projectively equivariant quantization", false);
  add("schwarzian", "Schwarzian data of a 1-D second-order operator", false);
  add("check",
      "check {adjoint-involution|equivariance|variation|sdiff-classify|regular|selfadjoint|cocycle}", true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (lambda0 != "symbolic") {
      try {
        cfg.lambda0 = Scalar::parse_rational(lambda0);
      } catch (const Error&) {
        throw SyntaxError("bad --lambda0 '" + lambda0 + "'", 0);
      }
    }
    cfg.bindings = parse_bindings(params);
    std::stringstream ss(symbols);
    for (std::string s; std::getline(ss, s, ',');)
      if (!s.empty()) cfg.params.insert(s);

    const Command cmd{cfg, operands, out};
    const std::string name = app.get_subcommands().front()->get_name();
    const Scalar l0 = cfg.lambda0_value();
    if (name == "adjoint") {
      cmd.emit(adjoint(cmd.op(0)));
    } else if (name == "compose") {
      cmd.emit(compose(cmd.op(0), cmd.op(1)));
    } else if (name == "lift") {
      run_lift(cmd, kind);
    } else if (name == "taylor") {
      const auto coeffs = taylor_expand(cmd.op(0), l0, cfg.volume_form());
      if (cfg.json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : coeffs) arr.push_back(nlohmann::json::parse(operator_to_json(cmd.bind(c))));
        out << nlohmann::json{{"schema", "denslift/1"}, {"coefficients", arr}}.dump() << "\n";
      } else {
        for (std::size_t k = 0; k < coeffs.size(); ++k)
          out << "Delta_" << k << " = " << to_string(cmd.bind(coeffs[k])) << "\n";
      }
    } else if (name == "assemble") {
      std::vector<DensityOperator> coeffs;
      for (std::size_t k = 0; k < operands.size(); ++k) coeffs.push_back(cmd.op(k));
      if (coeffs.empty()) throw SyntaxError("missing operand 1", 0);
      cmd.emit(taylor_assemble(coeffs, l0, cfg.volume_form()));
    } else if (name == "symbol") {
      cmd.emit(full_symbol(cmd.op(0), l0));
    } else if (name == "quantize") {
      cmd.emit(quantize(parse_symbol(cmd.operand(0), cfg), l0));
    } else if (name == "schwarzian") {
      cmd.emit(schwarzian_data(cmd.op(0), l0));
    } else if (name == "check") {
      run_check(cmd, kind);
    }
    return 0;
  } catch (const SyntaxError& e) {
    err << "syntax error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace denslift
