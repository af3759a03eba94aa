"""Independent arbitrary-precision oracles for the frozen test fixtures.

Run with: python3 tests/oracles/gen_fixtures.py
Every printed value is copied verbatim into the C++ unit tests.
"""
import mpmath as mp

mp.mp.dps = 40


def series_cosh(x, terms=40):
    return mp.fsum(x ** (2 * n) / mp.factorial(2 * n) for n in range(terms))


def series_sinh(x, terms=40):
    return mp.fsum(x ** (2 * n + 1) / mp.factorial(2 * n + 1) for n in range(terms))


def show(label, v):
    print(f"{label:40s} {mp.nstr(v, 20)}")


# kernels
show("cosh(1) series", series_cosh(1))
show("sinh(1) series", series_sinh(1))
show("-tanh(1)", -series_sinh(1) / series_cosh(1))

# tube density, noncompact (b = 1)
show("psi rh r=1", mp.sinh(1) * mp.cosh(1))
show("psi ch-like r=0.5", mp.sinh(0.5) ** 2 * (mp.sinh(1) / 2) * mp.cosh(0.5) ** 2)
show("rho r=0.5", 2 * mp.coth(0.5) + 2 * mp.coth(1) + 2 * mp.tanh(0.5))
show("H lap=0.3", mp.coth(1) + mp.tanh(1) - mp.mpf("0.3") / mp.cosh(1) ** 2)
show("psibar(1)", mp.sinh(1) ** 2 * (mp.sinh(2) / 2) * mp.cosh(1) ** 2)
show("f_density(0.5)", mp.sinh(0.5) ** 2)
show("volB rh rb=1", 2 * (mp.cosh(1) - 1))
show("u_hat r=1 g=1", mp.cosh(1) / mp.sqrt(mp.cosh(1) ** 2 + 1))

# lambda: mH={1:2}, r=0.5, g=0.3, lap=0.1, hess=0.01, k0=1
r, g, lap, hess = mp.mpf("0.5"), mp.mpf("0.3"), mp.mpf("0.1"), mp.mpf("0.01")
S = mp.cosh(r)
tt = -mp.tanh(r)
u = S / mp.sqrt(S ** 2 + g ** 2)
lam = -u * (2 * tt + lap / S ** 2 + g ** 2 * tt / (S ** 2 + g ** 2) - hess / (S ** 2 * (S ** 2 + g ** 2)))
show("lambda fixture", lam)


# delta functions for CH2/CH1 (mV1=0, mV2=1, mH=2), b = 1
def psibar_ch(s):
    if s == 0:
        return mp.mpf(1)
    return (mp.sinh(2 * s) / (2 * s)) * mp.cosh(s) ** 2


def d1(s):
    return mp.quad(lambda x: x * psibar_ch(x), [0, s])


def d2(s):
    return mp.quad(lambda x: x * psibar_ch(x) / mp.cosh(x), [0, s])


show("CH delta1(0.7)", d1(mp.mpf("0.7")))
show("CH delta2(0.7)", d2(mp.mpf("0.7")))

# convergence condition for a constant profile: CH2/CH1, r0 = 0.5, rB = 0.25
v1 = 2 * mp.pi
volB = v1 * mp.quad(lambda z: mp.sinh(z) ** 2, [0, mp.mpf("0.25")])
r0 = mp.mpf("0.5")
lhs = v1 * volB * r0 * psibar_ch(r0)  # Vol(M0) = v_mV * Vol(B) * delta1'(r0), v_mV = v_1
rhs = v1 * v1 * d2(r0)
show("conv volB", volB)
show("conv lhs", lhs)
show("conv rhs", rhs)
print("conv satisfied", lhs <= rhs)

# full radial Laplacian of r(z) = z^2, density sinh^2 (mu = 2 coth z)
show("full laplacian z=0.5", 2 + 2 * mp.coth(0.5) * 2 * mp.mpf("0.5"))
