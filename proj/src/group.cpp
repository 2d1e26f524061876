#include "homfrac/group.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace homfrac {

void GroupSpec::multiply_into(const double* g, const double* h, double* out) const {
  if (abelian()) {
    for (int k = 0; k < n; ++k) out[k] = g[k] + h[k];
    return;
  }
  int st = step();
  if (st > 4) throw UnsupportedStep("BCH truncation supports step <= 4, got " + std::to_string(st));

  double c1[kMaxDim], c2[kMaxDim], c3[kMaxDim], c4[kMaxDim];
  bracket_into(g, h, c1);  // [g,h]
  for (int k = 0; k < n; ++k) out[k] = g[k] + h[k] + 0.5 * c1[k];
  if (st >= 3) {
    bracket_into(g, c1, c2);  // [g,[g,h]]
    bracket_into(h, c1, c3);  // [h,[g,h]]
    for (int k = 0; k < n; ++k) out[k] += (c2[k] - c3[k]) / 12.0;
    if (st >= 4) {
      bracket_into(h, c2, c4);  // [h,[g,[g,h]]]
      for (int k = 0; k < n; ++k) out[k] -= c4[k] / 24.0;
    }
  }
}

Vec multiply(const GroupSpec& spec, const Vec& g, const Vec& h) {
  Vec out(spec.n);
  spec.multiply_into(g.data(), h.data(), out.data());
  return out;
}

Vec inverse(const GroupSpec& spec, const Vec& g) { return -g; }

Vec dilate(const GroupSpec& spec, double lambda, const Vec& g) {
  if (!(lambda > 0.0)) throw DomainError("dilation parameter must be positive");
  Vec out(spec.n);
  spec.dilate_into(lambda, g.data(), out.data());
  return out;
}

Vec bracket(const GroupSpec& spec, const Vec& x, const Vec& y) {
  Vec out(spec.n);
  spec.bracket_into(x.data(), y.data(), out.data());
  return out;
}

namespace {

constexpr double kStructTol = 1e-12;

std::string triple(int i, int j, int k) {
  std::ostringstream os;
  os << "(" << i + 1 << "," << j + 1 << "," << k + 1 << ")";
  return os.str();
}

}  // namespace

ValidationReport validate_spec(const GroupSpec& spec) {
  ValidationReport rep;
  const int n = spec.n;
  if (n < 1 || n > kMaxDim || spec.weights.size() != n) {
    rep.weights_ok = false;
    rep.issues.push_back({"weights", "dimension must be in [1," + std::to_string(kMaxDim) +
                                         "] and match the weight vector"});
    return rep;
  }
  if (std::abs(spec.weights[0] - 1.0) > kStructTol) {
    rep.weights_ok = false;
    rep.issues.push_back({"weights", "d_1 must equal 1"});
  }
  for (int j = 0; j + 1 < n; ++j) {
    if (spec.weights[j] > spec.weights[j + 1] + kStructTol) {
      rep.weights_ok = false;
      rep.issues.push_back({"weights", "weights must be nondecreasing at index " + std::to_string(j + 1)});
    }
  }

  // Dense table with antisymmetry applied; duplicate (i,j,k) entries are summed.
  std::vector<double> c(static_cast<std::size_t>(n) * n * n, 0.0);
  auto at = [&](int i, int j, int k) -> double& {
    return c[(static_cast<std::size_t>(i) * n + j) * n + k];
  };
  for (const auto& b : spec.brackets) {
    if (b.i < 0 || b.i >= n || b.j < 0 || b.j >= n || b.k < 0 || b.k >= n) {
      rep.antisymmetry_ok = false;
      rep.issues.push_back({"indices", "bracket entry out of range " + triple(b.i, b.j, b.k)});
      continue;
    }
    if (b.i == b.j && std::abs(b.c) > kStructTol) {
      rep.antisymmetry_ok = false;
      rep.issues.push_back({"antisymmetry", "[X_i,X_i] must vanish at " + triple(b.i, b.j, b.k)});
      continue;
    }
    at(b.i, b.j, b.k) += b.c;
    at(b.j, b.i, b.k) -= b.c;
  }

  // Grading: c_{ij}^k != 0 requires d_k = d_i + d_j.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (std::abs(at(i, j, k)) > kStructTol &&
            std::abs(spec.weights[k] - spec.weights[i] - spec.weights[j]) > kStructTol) {
          rep.grading_ok = false;
          rep.issues.push_back({"grading", "c != 0 but d_k != d_i + d_j at " + triple(i, j, k)});
        }
      }

  // Jacobi on basis triples: [[i,j],k] + [[j,k],i] + [[k,i],j] = 0.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int m = 0; m < n; ++m) {
            s += at(i, j, m) * at(m, k, l);
            s += at(j, k, m) * at(m, i, l);
            s += at(k, i, m) * at(m, j, l);
          }
          if (std::abs(s) > kStructTol) {
            rep.jacobi_ok = false;
            rep.issues.push_back({"jacobi", "Jacobi identity fails on basis triple " + triple(i, j, k) +
                                                " component " + std::to_string(l + 1)});
          }
        }

  if (spec.step() > 4) {
    rep.step_supported = false;
    rep.issues.push_back({"step", "step " + std::to_string(spec.step()) + " exceeds supported BCH order 4"});
  }
  return rep;
}

GroupSpec builtin_group(const std::string& name, int dim, const Vec& weights) {
  GroupSpec s;
  if (name == "euclidean") {
    if (dim < 1) throw UnknownGroup("euclidean requires a positive dimension");
    s.name = "euclidean";
    s.n = dim;
    s.weights = weights.size() == dim ? weights : Vec::Ones(dim);
  } else if (name == "heisenberg") {
    if (dim < 1) throw UnknownGroup("heisenberg requires a positive index n");
    s.name = "heisenberg" + std::to_string(dim);
    s.n = 2 * dim + 1;
    s.weights = Vec::Ones(s.n);
    s.weights[s.n - 1] = 2.0;
    for (int j = 0; j < dim; ++j) s.brackets.push_back({j, dim + j, 2 * dim, 1.0});
  } else if (name == "parabolic_r2") {
    s.name = "parabolic_r2";
    s.n = 2;
    s.weights = Vec(2);
    s.weights << 1.0, 2.0;
  } else {
    throw UnknownGroup("unknown builtin group '" + name + "'");
  }
  return s;
}

GroupSpec group_from_token(const std::string& token) {
  if (token.find(".json") != std::string::npos) return load_group_json(token);
  std::string head = token;
  std::string rest;
  if (auto pos = token.find(':'); pos != std::string::npos) {
    head = token.substr(0, pos);
    rest = token.substr(pos + 1);
  }
  if (head == "heisenberg") {
    int n = rest.empty() ? 1 : std::stoi(rest);
    return builtin_group("heisenberg", n);
  }
  if (head == "parabolic_r2") return builtin_group("parabolic_r2");
  if (head == "euclidean") {
    // euclidean:<n>[:w1,w2,...]
    int n = 1;
    Vec w;
    if (!rest.empty()) {
      auto pos = rest.find(':');
      n = std::stoi(rest.substr(0, pos));
      if (pos != std::string::npos) {
        w = Vec(n);
        std::stringstream ss(rest.substr(pos + 1));
        std::string item;
        int i = 0;
        while (std::getline(ss, item, ',') && i < n) w[i++] = std::stod(item);
        if (i != n) throw UnknownGroup("euclidean weight list must have n entries");
      }
    }
    return builtin_group("euclidean", n, w);
  }
  throw UnknownGroup("unrecognized group token '" + token + "'");
}

GroupSpec load_group_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnknownGroup("cannot open group file '" + path + "'");
  nlohmann::json j;
  in >> j;
  GroupSpec s;
  s.name = j.value("name", std::string("unnamed"));
  s.n = j.at("n").get<int>();
  auto w = j.at("weights").get<std::vector<double>>();
  if (static_cast<int>(w.size()) != s.n) throw UnknownGroup("weights length must equal n");
  s.weights = Eigen::Map<const Vec>(w.data(), s.n);
  if (j.contains("brackets")) {
    for (const auto& b : j.at("brackets")) {
      // File format is 1-based and stores i<j entries only.
      BracketTerm t;
      t.i = b.at("i").get<int>() - 1;
      t.j = b.at("j").get<int>() - 1;
      t.k = b.at("k").get<int>() - 1;
      t.c = b.at("c").get<double>();
      s.brackets.push_back(t);
    }
  }
  return s;
}

}  // namespace homfrac
