#include "ptbec/hierarchy.hpp"

#include "ptbec/errors.hpp"

namespace ptbec::hierarchy {

namespace {

int site_i(int p) { return p / 2 + 1; }
int site_j(int p) { return p % 2 + 1; }
int e_index(int i, int j) { return 2 * (i - 1) + (j - 1); }
double delta(int a, int b) { return a == b ? 1.0 : 0.0; }

Term constant(cplx c) { return Term{c, 0, {}}; }
Term single(cplx c, int a) { return Term{c, 1, {static_cast<std::uint8_t>(a), 0, 0}}; }
Term pair(cplx c, int a, int b) {
  return Term{c, 2, {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b), 0}};
}

void push(Polynomial& poly, const Term& t) {
  if (t.coeff != cplx(0.0, 0.0)) poly.push_back(t);
}

// G_part(E_ij) per unit coefficient.
Polynomial build_first(Part part, int p) {
  const int i = site_i(p), j = site_j(p);
  const cplx I(0.0, 1.0);
  Polynomial out;
  switch (part) {
    case Part::Hopping:
      // i[-(E12 + E21), E_ij] with [E_kl, E_ij] = d_li E_kj - d_jk E_il.
      for (auto [k, l] : {std::pair{1, 2}, std::pair{2, 1}}) {
        push(out, single(-I * delta(l, i), e_index(k, j)));
        push(out, single(I * delta(j, k), e_index(i, l)));
      }
      break;
    case Part::Interaction:
      // H_U = 1/2 sum_m (E_mm E_mm - E_mm);  [E_mm, E_ij] = (d_mi - d_mj) E_ij.
      for (int m = 1; m <= 2; ++m) {
        const double d = delta(m, i) - delta(m, j);
        if (d == 0.0) continue;
        const int mm = e_index(m, m);
        push(out, pair(0.5 * I * d, mm, p));
        push(out, pair(0.5 * I * d, p, mm));
        push(out, single(-0.5 * I * d, p));
      }
      break;
    case Part::Loss:
      // c = a1:  c^dag E_ij c - {c^dag c, E_ij}/2 = -(d_i1 E_1j + d_j1 E_i1)/2
      push(out, single(-0.5 * delta(i, 1), e_index(1, j)));
      push(out, single(-0.5 * delta(j, 1), e_index(i, 1)));
      break;
    case Part::Gain:
      // c = a2^dag:  = (d_j2 (E_i2 + d_i2) + d_i2 (E_2j + d_j2)) / 2
      push(out, single(0.5 * delta(j, 2), e_index(i, 2)));
      push(out, constant(0.5 * delta(j, 2) * delta(i, 2)));
      push(out, single(0.5 * delta(i, 2), e_index(2, j)));
      push(out, constant(0.5 * delta(i, 2) * delta(j, 2)));
      break;
  }
  return out;
}

// [c^dag, E_p][E_q, c] for the jump operator of the part.
Polynomial build_cross(Part part, int p, int q) {
  const int i = site_i(p), j = site_j(p), k = site_i(q), l = site_j(q);
  Polynomial out;
  if (part == Part::Loss) {
    push(out, single(delta(1, j) * delta(1, k), e_index(i, l)));
  } else if (part == Part::Gain) {
    const double w = delta(2, i) * delta(2, l);
    push(out, single(w, e_index(k, j)));
    push(out, constant(w * delta(j, k)));
  }
  return out;
}

Polynomial times_right(const Polynomial& poly, int q) {
  Polynomial out;
  for (Term t : poly) {
    t.word[t.len] = static_cast<std::uint8_t>(q);
    ++t.len;
    out.push_back(t);
  }
  return out;
}

Polynomial times_left(int p, const Polynomial& poly) {
  Polynomial out;
  for (const Term& t : poly) {
    Term u{t.coeff, static_cast<std::uint8_t>(t.len + 1), {static_cast<std::uint8_t>(p), 0, 0}};
    for (int a = 0; a < t.len; ++a) u.word[static_cast<std::size_t>(a + 1)] = t.word[static_cast<std::size_t>(a)];
    out.push_back(u);
  }
  return out;
}

struct Tables {
  std::array<std::array<Polynomial, 4>, 4> first;       // [part][p]
  std::array<std::array<Polynomial, 16>, 4> second;     // [part][4p+q]

  Tables() {
    for (int part = 0; part < 4; ++part) {
      for (int p = 0; p < 4; ++p) first[part][p] = build_first(static_cast<Part>(part), p);
    }
    for (int part = 0; part < 4; ++part) {
      for (int p = 0; p < 4; ++p) {
        for (int q = 0; q < 4; ++q) {
          // G(E_p E_q) = G(E_p) E_q + E_p G(E_q) + [c^dag, E_p][E_q, c]
          Polynomial g = times_right(first[part][p], q);
          const Polynomial left = times_left(p, first[part][q]);
          g.insert(g.end(), left.begin(), left.end());
          const Polynomial cross = build_cross(static_cast<Part>(part), p, q);
          g.insert(g.end(), cross.begin(), cross.end());
          second[part][static_cast<std::size_t>(4 * p + q)] = std::move(g);
        }
      }
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

cplx evaluate(const Polynomial& poly, const EMoments& e, const ThirdMoments& third) {
  cplx sum = 0.0;
  for (const Term& t : poly) {
    switch (t.len) {
      case 0: sum += t.coeff; break;
      case 1: sum += t.coeff * e.m[t.word[0]]; break;
      case 2: sum += t.coeff * e.S[static_cast<std::size_t>(4 * t.word[0] + t.word[1])]; break;
      default: sum += t.coeff * third[static_cast<std::size_t>(16 * t.word[0] + 4 * t.word[1] + t.word[2])]; break;
    }
  }
  return sum;
}

// E_p = sum_a to_e(p, a) A_a and A_a = sum_p to_a(a, p) E_p, A = (L_x, L_y, L_z, n).
Eigen::Matrix4cd to_e_matrix() {
  const cplx I(0.0, 1.0);
  Eigen::Matrix4cd T;
  T << 0.0, 0.0, -1.0, 0.5,
       1.0, -I, 0.0, 0.0,
       1.0, I, 0.0, 0.0,
       0.0, 0.0, 1.0, 0.5;
  return T;
}

Eigen::Matrix4cd to_a_matrix() {
  const cplx I(0.0, 1.0);
  Eigen::Matrix4cd B;
  B << 0.0, 0.5, 0.5, 0.0,
       0.0, 0.5 * I, -0.5 * I, 0.0,
       -0.5, 0.0, 0.0, 0.5,
       1.0, 0.0, 0.0, 1.0;
  return B;
}

double levi_civita(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0.0;
  return ((a == 0 && b == 1) || (a == 1 && b == 2) || (a == 2 && b == 0)) ? 1.0 : -1.0;
}

std::array<SparseOperator, 4> e_operators(const TwoModeBasis& basis) {
  std::array<SparseOperator, 4> ops;
  for (int p = 0; p < 4; ++p) {
    const Site si = site_i(p) == 1 ? Site::One : Site::Two;
    const Site sj = site_j(p) == 1 ? Site::One : Site::Two;
    ops[static_cast<std::size_t>(p)] = si == sj ? mode_operator(basis, si, Ladder::Number)
                                                 : mode_operator(basis, si, Ladder::Create) *
                                                       mode_operator(basis, sj, Ladder::Annihilate);
  }
  return ops;
}

}  // namespace

const Polynomial& first_order_generator(Part part, int p) {
  if (p < 0 || p > 3) throw InvalidArgument("E index out of range");
  return tables().first[static_cast<std::size_t>(part)][static_cast<std::size_t>(p)];
}

const Polynomial& second_order_generator(Part part, int p, int q) {
  if (p < 0 || p > 3 || q < 0 || q > 3) throw InvalidArgument("E index out of range");
  return tables().second[static_cast<std::size_t>(part)][static_cast<std::size_t>(4 * p + q)];
}

EMoments from_bloch(const Eigen::Vector4d& means, const Eigen::Matrix4d& delta) {
  const cplx I(0.0, 1.0);
  Eigen::Matrix4cd AA;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      cplx comm = 0.0;
      if (a < 3 && b < 3) {
        for (int c = 0; c < 3; ++c) comm += I * levi_civita(a, b, c) * means[c];
      }
      AA(a, b) = 0.5 * delta(a, b) + means[a] * means[b] + 0.5 * comm;
    }
  }
  static const Eigen::Matrix4cd T = to_e_matrix();
  const Eigen::Vector4cd m = T * means.cast<cplx>();
  const Eigen::Matrix4cd S = T * AA * T.transpose();
  EMoments e;
  for (int p = 0; p < 4; ++p) {
    e.m[static_cast<std::size_t>(p)] = m[p];
    for (int q = 0; q < 4; ++q) e.S[static_cast<std::size_t>(4 * p + q)] = S(p, q);
  }
  return e;
}

void to_bloch_derivative(const EMoments& e, const EMoments& de, Eigen::Vector4d& dmeans,
                         Eigen::Matrix4d& ddelta) {
  static const Eigen::Matrix4cd B = to_a_matrix();
  Eigen::Vector4cd m, dm;
  Eigen::Matrix4cd dS;
  for (int p = 0; p < 4; ++p) {
    m[p] = e.m[static_cast<std::size_t>(p)];
    dm[p] = de.m[static_cast<std::size_t>(p)];
    for (int q = 0; q < 4; ++q) dS(p, q) = de.S[static_cast<std::size_t>(4 * p + q)];
  }
  const Eigen::Vector4d mean = (B * m).real();
  dmeans = (B * dm).real();
  const Eigen::Matrix4cd dAA = B * dS * B.transpose();
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      ddelta(a, b) = (dAA(a, b) + dAA(b, a)).real() - 2.0 * (dmeans[a] * mean[b] + mean[a] * dmeans[b]);
    }
  }
}

ThirdMoments factorized_third_moments(const EMoments& e) {
  ThirdMoments t{};
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      for (int c = 0; c < 4; ++c) {
        const cplx ma = e.m[static_cast<std::size_t>(a)], mb = e.m[static_cast<std::size_t>(b)],
                   mc = e.m[static_cast<std::size_t>(c)];
        t[static_cast<std::size_t>(16 * a + 4 * b + c)] =
            e.second(a, b) * mc + e.second(a, c) * mb + e.second(b, c) * ma - 2.0 * ma * mb * mc;
      }
    }
  }
  return t;
}

EMoments derivative(const EMoments& e, const ThirdMoments& third, const GeneratorRates& rates) {
  const std::array<std::pair<Part, double>, 4> parts{
      {{Part::Hopping, rates.J}, {Part::Interaction, rates.U}, {Part::Loss, rates.loss}, {Part::Gain, rates.gain}}};
  const Tables& tab = tables();
  EMoments d;
  for (auto [part, coeff] : parts) {
    if (coeff == 0.0) continue;
    const auto k = static_cast<std::size_t>(part);
    for (std::size_t p = 0; p < 4; ++p) d.m[p] += coeff * evaluate(tab.first[k][p], e, third);
    for (std::size_t pq = 0; pq < 16; ++pq) d.S[pq] += coeff * evaluate(tab.second[k][pq], e, third);
  }
  return d;
}

EMoments exact_moments(const Eigen::MatrixXcd& rho, const TwoModeBasis& basis) {
  const auto ops = e_operators(basis);
  EMoments e;
  for (std::size_t p = 0; p < 4; ++p) {
    e.m[p] = expectation(rho, ops[p]);
    for (std::size_t q = 0; q < 4; ++q) e.S[4 * p + q] = expectation(rho, ops[p] * ops[q]);
  }
  return e;
}

ThirdMoments exact_third_moments(const Eigen::MatrixXcd& rho, const TwoModeBasis& basis) {
  const auto ops = e_operators(basis);
  ThirdMoments t{};
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      const SparseOperator ab = ops[a] * ops[b];
      for (std::size_t c = 0; c < 4; ++c) t[16 * a + 4 * b + c] = expectation(rho, ab * ops[c]);
    }
  }
  return t;
}

ThirdMoments third_cumulants(const Eigen::MatrixXcd& rho, const TwoModeBasis& basis) {
  ThirdMoments exact = exact_third_moments(rho, basis);
  const ThirdMoments fact = factorized_third_moments(exact_moments(rho, basis));
  for (std::size_t k = 0; k < exact.size(); ++k) exact[k] -= fact[k];
  return exact;
}

}  // namespace ptbec::hierarchy
