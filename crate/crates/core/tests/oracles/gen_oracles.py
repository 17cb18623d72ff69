"""Frozen reference values for the Gamma and oscillator m-function tests.

Run with mpmath installed; paste the printed tables into tests/oracles.rs.
"""
import mpmath as mp

mp.mp.dps = 30

GAMMA_POINTS = [
    (1, 0), (0.5, 0), (0.25, -0.3), (3.7, 2.1), (-2.5, 0.1), (10, 20),
    (0.1, 45), (-30.3, -4), (40, 1), (1e-3, 0), (-0.5, 0), (0.3, -49.0),
    (-7.25, 3.5), (25, -25),
]


def root(z, n):
    r, th = abs(z), mp.arg(z)
    if th < 0:
        th += 2 * mp.pi
    return r ** (mp.mpf(1) / n) * mp.expj(th / n)


def m_gamma(c, lam):
    s = root(c, 2)
    q = root(c, 4)
    return -mp.gamma(0.25 - lam / (4 * s)) / (2 * q * mp.gamma(0.75 - lam / (4 * s)))


def m_pcf(c, lam):
    # psi(x) = D_nu(sqrt2 c^{1/4} x), nu = lam / (2 sqrt c) - 1/2, m = psi(0) / psi'(0)
    s = root(c, 2)
    q = root(c, 4)
    nu = lam / (2 * s) - mp.mpf(1) / 2
    d0 = mp.pcfd(nu, 0)
    d1 = mp.diff(lambda z: mp.pcfd(nu, z), 0)
    return d0 / (d1 * mp.sqrt(2) * q)


def main():
    print("// Gamma(z): (re, im, gamma_re, gamma_im)")
    for re, im in GAMMA_POINTS:
        g = mp.gamma(mp.mpc(re, im))
        print(f"({re!r}, {im!r}, {mp.nstr(g.real, 20)}, {mp.nstr(g.imag, 20)}),")
    print("// oscillator m_{pi/2}: (arg c / pi, lam_re, lam_im, m_re, m_im)")
    for argc in [mp.mpf(1) / 3, mp.mpf(1) / 2, mp.mpf(1) / 6]:
        c = mp.expj(mp.pi * argc)
        for lam in [mp.mpc(0, 1), mp.mpc(-1, 1), mp.mpc(-2, 0), mp.mpc(0.5, -2), mp.mpc(3, 0.5)]:
            a = m_gamma(c, lam)
            b = m_pcf(c, lam)
            assert abs(a - b) < mp.mpf(10) ** -20 * abs(a), (argc, lam, a, b)
            print(f"({mp.nstr(argc, 17)}, {mp.nstr(lam.real, 17)}, {mp.nstr(lam.imag, 17)}, "
                  f"{mp.nstr(a.real, 20)}, {mp.nstr(a.imag, 20)}),")


if __name__ == "__main__":
    main()
