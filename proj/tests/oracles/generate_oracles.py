"""High-precision reference values for the unit tests.

Run with `python3 generate_oracles.py > ../oracle_values.hpp`. Every value
is computed directly from its defining integral or formula in mpmath; none
of the library's reductions are reused.
"""
import mpmath as mp

# Scalars near 1 (H of large negative arguments) need far more than
# double precision to keep their distance from 1.
mp.mp.dps = 400


def H(x):
    return mp.erfc(mp.mpf(x) / mp.sqrt(2)) / 2


def phi(x):
    return mp.exp(-mp.mpf(x) ** 2 / 2) / mp.sqrt(2 * mp.pi)


def emit(name, value):
    print(f"inline constexpr double {name} = {mp.nstr(value, 25, min_fixed=-1, max_fixed=-1)};")


def emit_array(name, values):
    body = ", ".join(mp.nstr(v, 25, min_fixed=-1, max_fixed=-1) for v in values)
    print(f"inline constexpr double {name}[] = {{{body}}};")


print("#pragma once")
print("// Generated by tests/oracles/generate_oracles.py; do not edit.")
print("namespace oracle {")

tail_points = [-37, -20, -8.5, -3, -1, -0.25, 0, 0.5, 1, 2.5, 5, 7.25, 10, 15, 20, 26, 30, 37]
emit_array("tail_x", tail_points)
emit_array("tail_H", [H(x) for x in tail_points])
emit_array("tail_log_H", [mp.log1p(-H(-x)) if x < 0 else mp.log(H(x)) for x in [-37, -5, 0, 5, 30, 40, 100, 500]])
emit_array("tail_log_H_x", [-37, -5, 0, 5, 30, 40, 100, 500])
emit_array("mills_x", [0, 1, 4.9, 5.1, 12, 40])
emit_array("mills", [H(x) / phi(x) for x in [0, 1, 4.9, 5.1, 12, 40]])

# Boltzmann weights of the local field.
beta_u = [(0.0, 2.0), (1.5, 2.0), (-1.5, 2.0), (4.0, 50.0), (12.0, 50.0), (-12.0, 50.0), (30.0, 1000.0), (2.0, 1e-3)]
emit_array("boltz_u", [u for u, _ in beta_u])
emit_array("boltz_beta", [b for _, b in beta_u])
def Z(u, beta):
    return H(u) + mp.exp(-beta) * H(-u)
emit_array("log_boltz", [mp.log(Z(u, b)) for u, b in beta_u])
emit_array("boltz_ratio", [phi(u) / Z(u, b) for u, b in beta_u])
emit_array("thermal_fraction", [mp.exp(-b) * H(-u) / Z(u, b) for u, b in beta_u])

emit("log_boltzmann_plus_tiny", mp.log(mp.exp(-20) * (1 - mp.mpf("1e-30")) + mp.mpf("1e-30")))
emit("log_boltzmann_minus_mid", mp.log((mp.exp(-3) - 1) * mp.mpf("0.7") + 1))

# Local field at (y=0, t=1, R=0.6, q=0.72, b=-0.2).
emit("field_example", (mp.sqrt(mp.mpf("0.72") - mp.mpf("0.36")) + mp.mpf("0.2")) / mp.sqrt(mp.mpf("0.28")))

# Overlap root q = D (1 - q)^2.
emit("overlap_q_qhat3", (7 - mp.sqrt(13)) / 6)
emit("overlap_q_golden", (3 - mp.sqrt(5)) / 2)

# Entropic term at an explicit lambda.
def G0(R, q, Rh, qh, lam):
    return -Rh * R + q * qh / 2 + lam / 2 - mp.log(lam + qh) / 2 + (Rh ** 2 + qh) / (2 * (lam + qh)) - mp.mpf(1) / 2

R, q, Rh, qh = mp.mpf("0.3"), mp.mpf("0.5"), mp.mpf("0.6"), mp.mpf("1.4")
emit("entropic_example", G0(R, q, Rh, qh, 1 / (1 - q) - qh))
# Stationary lambda of G0 at that point (not the eliminated value, since
# the point does not satisfy the overlap equations).
emit("entropic_example_stationary_lambda", mp.findroot(lambda L: mp.diff(lambda x: G0(R, q, Rh, qh, x), L), 0.5))
# A point that does satisfy them: R_hat = 0.6, q_hat = 1.4, q from D (1-q)^2.
D = Rh ** 2 + qh
qc = 1 - 2 / (mp.sqrt(4 * D + 1) + 1)
Rc = Rh * (1 - qc)
emit("consistent_q", qc)
emit("consistent_R", Rc)
emit("consistent_stationary_lambda", mp.findroot(lambda L: mp.diff(lambda x: G0(Rc, qc, Rh, qh, x), L), 0.5))
emit("consistent_entropic", G0(Rc, qc, Rh, qh, 1 / (1 - qc) - qh))

# Energetic terms by direct double integration over (y, t).
def energetic(b0, beta, R, q, b, sign):
    b0, R, q, b = map(mp.mpf, (b0, R, q, b))
    s = mp.sqrt(q - R ** 2)
    d = mp.sqrt(1 - q)
    k = mp.exp(-beta)
    def inner(y):
        def f(t):
            u = (t * s - y * R - b) / d
            h = H(u)
            if sign > 0:
                return phi(t) * mp.log(k + (1 - k) * h)
            return phi(t) * mp.log((k - 1) * h + 1)
        return mp.quad(f, [-mp.inf, -3, 0, 3, mp.inf])
    if sign > 0:
        val = mp.quad(lambda y: phi(y) * inner(y), [-b0, 2, 5, mp.inf])
        return -val / H(-b0)
    val = mp.quad(lambda y: phi(y) * inner(y), [-mp.inf, -5, -2, -b0])
    return -val / H(b0)

mp.mp.dps = 20
emit("energetic_plus_example", energetic("-0.6", 2, "0.3", "0.5", "-0.3", +1))
emit("energetic_minus_example", energetic("-0.6", 2, "0.3", "0.5", "-0.3", -1))

# Misclassified class mass by direct 2-D integration of the indicator:
# x, y standard normal; student field x sqrt(1-R^2) + y R + b.
def class_errors(R, b, b0):
    R, b, b0 = map(mp.mpf, (R, b, b0))
    w = mp.sqrt(1 - R ** 2)
    # positives: y > -b0 and student field < 0  <=> x < -(yR + b)/w
    Ip = mp.quad(lambda y: phi(y) * (1 - H(-(y * R + b) / w)), [-b0, mp.inf])
    Im = mp.quad(lambda y: phi(y) * H(-(y * R + b) / w), [-mp.inf, -b0])
    return Ip, Im

Ip, Im = class_errors("0.5", "-0.3", "-0.6")
emit("class_error_plus_example", Ip)
emit("class_error_minus_example", Im)

emit("boundary_density_plus_m1", phi(-1) / H(1))
emit("boundary_density_minus_m1", phi(-1) / H(-1))

# Inverse Gaussian tail.
emit_array("inverse_tail_p", [mp.mpf("1e-300"), mp.mpf("1e-7"), mp.mpf("0.27"), mp.mpf("0.5"), mp.mpf("0.999")])
emit_array("inverse_tail", [mp.findroot(lambda x: H(x) - p, 0) if p > 1e-10 else mp.findroot(lambda x: mp.log(H(x)) - mp.log(p), 30)
                            for p in [mp.mpf("1e-300"), mp.mpf("1e-7"), mp.mpf("0.27"), mp.mpf("0.5"), mp.mpf("0.999")]])

print("}  // namespace oracle")
