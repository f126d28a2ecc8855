"""Closed-form Volkov action and its derivatives.

For the stationary momentum p_s(t, t') the action

    S_V(t, t') = 1/2 int_{t'}^{t} (p_s + A(tau))^2 dtau + Ip (t - t')

is evaluated in closed form from the antiderivatives of A and A.A.
All partial derivatives up to third order, and the constrained
derivatives d^2 S_V/dt^2 and d^3 S_V/dt^3 taken along the ionization
constraint t' = t'_s(t), are analytic expressions in the same
quantities; finite differences appear only in the test suite.

Throughout, dots denote non-conjugating complex bilinear products
(u.v = sum u_i v_i), which is what analytic continuation requires.
"""

COINCIDENT_FLOOR = 1e-12
DENOMINATOR_FLOOR = 1e-12


class CoincidentTimesError(ValueError):
    """t and t' closer than the configured floor."""


class DegenerateDenominatorError(ArithmeticError):
    """|d2S/dt'^2| below the floor; constrained derivatives undefined."""


class AtomParams:
    """Atomic parameters: ionization potential Ip in a.u."""

    def __init__(self, Ip):
        if Ip <= 0:
            raise ValueError("Ip must be positive")
        self.Ip = float(Ip)

    def __repr__(self):
        return f"AtomParams(Ip={self.Ip!r})"


class DerivativeBundle:
    """All action derivatives evaluated at one (t, t') pair."""

    __slots__ = ("S_V", "dS_dt", "dS_dtp", "d2S_dt2", "d2S_dtdtp",
                 "d2S_dtp2", "d2S_constrained", "d3S_constrained")

    def __init__(self, S_V, dS_dt, dS_dtp, d2S_dt2, d2S_dtdtp, d2S_dtp2,
                 d2S_constrained, d3S_constrained):
        self.S_V = S_V
        self.dS_dt = dS_dt
        self.dS_dtp = dS_dtp
        self.d2S_dt2 = d2S_dt2
        self.d2S_dtdtp = d2S_dtdtp
        self.d2S_dtp2 = d2S_dtp2
        self.d2S_constrained = d2S_constrained
        self.d3S_constrained = d3S_constrained


class VolkovAction:
    """Closed-form action evaluator bound to one field and atom.

    The saddle/cutoff solvers only use the methods of this class, so a
    synthetic action model with the same interface can be substituted
    for testing.
    """

    def __init__(self, field, atom, coincident_floor=COINCIDENT_FLOOR,
                 denominator_floor=DENOMINATOR_FLOOR):
        self.field = field
        self.atom = atom
        self.coincident_floor = coincident_floor
        self.denominator_floor = denominator_floor

    # -- elementary quantities ------------------------------------------

    def _tau(self, t, tp):
        tau = t - tp
        if abs(tau) < self.coincident_floor:
            raise CoincidentTimesError(
                f"|t - t'| = {abs(tau):.3e} below floor {self.coincident_floor:.1e}")
        return tau

    def stationary_momentum(self, t, tp):
        """p_s = -(1/(t-t')) int_{t'}^t A, enforcing the return condition."""
        tau = self._tau(t, tp)
        return -(self.field.antider_A(t) - self.field.antider_A(tp)) / tau

    def volkov_action(self, t, tp):
        """S_V at the stationary momentum, closed form."""
        tau = self._tau(t, tp)
        ps = self.stationary_momentum(t, tp)
        ia2 = self.field.antider_A2(t) - self.field.antider_A2(tp)
        # 1/2 int (p+A)^2 = 1/2 p^2 tau + p.int A + 1/2 int A^2
        #                 = -1/2 p_s^2 tau + 1/2 int A^2   at p = p_s
        return -0.5 * (ps @ ps) * tau + 0.5 * ia2 + self.atom.Ip * tau

    def dS_dt(self, t, tp):
        """Recollision equation left side: 1/2 (p_s + A(t))^2 + Ip."""
        v = self.stationary_momentum(t, tp) + self.field.vector_potential(t)
        return 0.5 * (v @ v) + self.atom.Ip

    def dS_dtp(self, t, tp):
        """Ionization equation: dS/dt' = -[1/2 (p_s + A(t'))^2 + Ip]."""
        w = self.stationary_momentum(t, tp) + self.field.vector_potential(tp)
        return -(0.5 * (w @ w) + self.atom.Ip)

    # -- higher partials -------------------------------------------------

    def second_partials(self, t, tp):
        """(d2S/dt2, d2S/dtdt', d2S/dt'2) at fixed-variable partials.

        Uses dp_s/dt = -(p_s+A(t))/(t-t') and dp_s/dt' = (p_s+A(t'))/(t-t').
        """
        tau = self._tau(t, tp)
        ps = self.stationary_momentum(t, tp)
        v = ps + self.field.vector_potential(t)
        w = ps + self.field.vector_potential(tp)
        v_t = self.field.dA_dt(t) - v / tau
        w_tp = self.field.dA_dt(tp) + w / tau
        stt = v @ v_t
        stp = (v @ w) / tau
        spp = -(w @ w_tp)
        return stt, stp, spp

    def third_partials(self, t, tp):
        """(S_ttt, S_ttp, S_tpp, S_ppp): all third partial derivatives."""
        tau = self._tau(t, tp)
        ps = self.stationary_momentum(t, tp)
        At, Atp = self.field.vector_potential(t), self.field.vector_potential(tp)
        v, w = ps + At, ps + Atp
        dAt, dAtp = self.field.dA_dt(t), self.field.dA_dt(tp)
        ddAt, ddAtp = self.field.d2A_dt2(t), self.field.d2A_dt2(tp)
        v_t = dAt - v / tau
        w_tp = dAtp + w / tau
        sttt = (v_t @ v_t) + (v @ ddAt) - (v @ v_t) / tau + (v @ v) / tau ** 2
        sttp = (w @ v_t) / tau - (v @ (v + w)) / tau ** 2
        stpp = (w @ w) / tau ** 2 + 2 * (v @ w) / tau ** 2 + (v @ dAtp) / tau
        sppp = -((w_tp @ w_tp) + (w @ ddAtp) + (w @ w_tp) / tau + (w @ w) / tau ** 2)
        return sttt, sttp, stpp, sppp

    # -- constrained derivatives ----------------------------------------

    def _check_denominator(self, spp):
        if abs(spp) < self.denominator_floor:
            raise DegenerateDenominatorError(
                f"|d2S/dt'^2| = {abs(spp):.3e} below floor "
                f"{self.denominator_floor:.1e}")

    def constrained_d2S(self, t, tp):
        """d^2 S_V/dt^2 along the ionization constraint t' = t'_s(t)."""
        stt, stp, spp = self.second_partials(t, tp)
        self._check_denominator(spp)
        return (stt * spp - stp ** 2) / spp

    def constrained_d3S(self, t, tp):
        """d^3 S_V/dt^3 along the constraint.

        With u' = dt'_s/dt = -S_tt'/S_t't' substituted at each step:
        d^3S/dt^3 = S_ttt + 2u'S_ttt' + u'^2 S_tt't' + u'' S_tt'.
        """
        _, stp, spp = self.second_partials(t, tp)
        self._check_denominator(spp)
        sttt, sttp, stpp, sppp = self.third_partials(t, tp)
        u1 = -stp / spp
        u2 = -((sttp + u1 * stpp) * spp - stp * (stpp + u1 * sppp)) / spp ** 2
        return sttt + 2 * u1 * sttp + u1 ** 2 * stpp + u2 * stp

    def bundle(self, t, tp):
        """DerivativeBundle with everything evaluated at (t, t')."""
        stt, stp, spp = self.second_partials(t, tp)
        self._check_denominator(spp)
        return DerivativeBundle(
            S_V=self.volkov_action(t, tp),
            dS_dt=self.dS_dt(t, tp),
            dS_dtp=self.dS_dtp(t, tp),
            d2S_dt2=stt, d2S_dtdtp=stp, d2S_dtp2=spp,
            d2S_constrained=(stt * spp - stp ** 2) / spp,
            d3S_constrained=self.constrained_d3S(t, tp),
        )


# -- module-level conveniences (field, atom) -----------------------------

def stationary_momentum(field, t, tp):
    """p_s(t, t') for a field (atom-independent)."""
    return VolkovAction(field, AtomParams(1.0)).stationary_momentum(t, tp)


def volkov_action(field, atom, t, tp):
    return VolkovAction(field, atom).volkov_action(t, tp)


def dS_dt(field, atom, t, tp):
    return VolkovAction(field, atom).dS_dt(t, tp)


def dS_dtp(field, atom, t, tp):
    return VolkovAction(field, atom).dS_dtp(t, tp)


def second_partials(field, atom, t, tp):
    return VolkovAction(field, atom).second_partials(t, tp)


def constrained_d2S(field, atom, t, tp):
    return VolkovAction(field, atom).constrained_d2S(t, tp)


def constrained_d3S(field, atom, t, tp):
    return VolkovAction(field, atom).constrained_d3S(t, tp)
