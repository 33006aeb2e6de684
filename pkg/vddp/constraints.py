"""Arithmetization of the Legendre PRF and the Laplace circuit, and the quotient argument.

Layout: dimension j owns the block of rows j * block .. j * block + block - 1 of a
power-of-two domain of size N = D * block. Slot s of a block holds LPRF bit
j * n_lap + s; the zeroing coin's chain comes first, then the sign bit, then one
chain per magnitude level. Row j * block (slot 0) carries the assembled noise and the
output relation, so those rows are exactly the share domain of size D.
"""

import logging
from dataclasses import dataclass, field as dc_field
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

from vddp.algebra import (
    BLS_FIELD,
    EvalDomain,
    PrimeField,
    domain_generate,
    intt,
    lagrange_eval,
    next_power_of_two,
    ntt,
    poly_add,
    poly_eval,
    poly_scale_input,
    poly_trim,
    vanishing_poly,
)
from vddp.commit import Commitment, KzgOpening, PublicParams, kzg_commit, kzg_open, kzg_verify
from vddp.errors import ParameterError
from vddp.randomness import LaplaceParams, LapTrace, LprfOutput
from vddp.rng import Rng
from vddp.sigma import EVSC_MAX_RETRIES, NO_TAMPER, _run
from vddp.transcript import ChallengeSource, Transcript, TranscriptReader

logger = logging.getLogger(__name__)

LPRF_COLUMNS = ("B", "W", "S")
LAP_COLUMNS = ("R", "A", "SG", "AUX", "NOISE")
SELECTORS = (
    "SEL_BIT",
    "SEL_INIT",
    "SEL_OR",
    "SEL_AND",
    "SEL_SG_COPY",
    "SEL_SIGN",
    "SEL_ACC",
    "SEL_ACC_END",
    "SEL_BASE",
)

# Columns each proof group opens, and those also opened at omega * u
GROUP_COLUMNS = {
    "lprf": ("B", "W", "S"),
    "lap": ("B", "R", "A", "SG", "AUX", "NOISE", "X"),
}
GROUP_SHIFTED = {"lprf": (), "lap": ("R", "A", "SG")}

# Extended evaluation domain factor for the quotient
BLOWUP = 4

GateExpr = Callable[[Dict[str, int]], int]


@dataclass
class Gate:
    name: str
    group: str
    selector: str
    expr: GateExpr


@dataclass(frozen=True)
class CircuitLayout:
    d: int
    n_lap: int
    D: int
    block: int

    @property
    def N(self) -> int:
        return self.D * self.block

    def row(self, j: int, slot: int) -> int:
        return j * self.block + slot

    def lprf_index(self, j: int, slot: int) -> int:
        return j * self.n_lap + slot


def layout_for(params: LaplaceParams, d: int) -> CircuitLayout:
    if d < 1:
        raise ParameterError("dimension must be at least 1")
    return CircuitLayout(d=d, n_lap=params.n_lap, D=next_power_of_two(d), block=next_power_of_two(params.n_lap))


def _gates(qnr: int) -> List[Gate]:
    return [
        Gate("lprf", "lprf", "SEL_BIT", lambda v: v["W"] * v["W"] - ((1 - v["B"]) * qnr + v["B"]) * (v["K"] + v["S"])),
        Gate("bool", "lprf", "SEL_BIT", lambda v: v["B"] * (1 - v["B"])),
        Gate("init", "lap", "SEL_INIT", lambda v: v["R"] - v["B"]),
        Gate("or", "lap", "SEL_OR", lambda v: v["R"] - (v["R+"] + v["B"] - v["R+"] * v["B"])),
        Gate("and", "lap", "SEL_AND", lambda v: v["R"] - v["R+"] * v["B"]),
        Gate("sign_copy", "lap", "SEL_SG_COPY", lambda v: v["SG"] - v["SG+"]),
        Gate("sign", "lap", "SEL_SIGN", lambda v: v["SG"] - v["B"]),
        Gate("acc", "lap", "SEL_ACC", lambda v: v["A"] - v["A+"] - v["M"] * v["R"]),
        Gate("acc_end", "lap", "SEL_ACC_END", lambda v: v["A"] - 1 - v["M"] * v["R"]),
        Gate("aux", "lap", "SEL_BASE", lambda v: v["AUX"] - (2 * v["SG"] - 1) * v["A"]),
        Gate("noise", "lap", "SEL_BASE", lambda v: v["NOISE"] - (1 - v["R"]) * v["AUX"]),
        Gate("output", "lap", "SEL_BASE", lambda v: v["Y"] - v["X"] - v["NOISE"]),
    ]


@dataclass
class ConstraintSystem:
    """Public columns, gates and domains of the server circuit for (params, d)."""

    params: LaplaceParams
    layout: CircuitLayout
    domain: EvalDomain
    share_domain: EvalDomain
    public: Dict[str, List[int]]
    gates: List[Gate]
    field: PrimeField = BLS_FIELD
    _public_polys: Dict[str, List[int]] = dc_field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return self.layout.N

    @property
    def num_constraints(self) -> int:
        """Gate instances: one per (gate, row with its selector on)."""
        return sum(sum(self.public[g.selector]) for g in self.gates)

    @property
    def quotient_length(self) -> int:
        # Columns have degree N + 1, selectors N - 1
        return 2 * self.N + 2

    @property
    def required_degree(self) -> int:
        return self.quotient_length

    def gates_of(self, group: str) -> List[Gate]:
        return [g for g in self.gates if g.group == group]

    def public_poly(self, name: str) -> List[int]:
        if name not in self._public_polys:
            self._public_polys[name] = ntt(self.public[name], self.domain)
        return self._public_polys[name]


def expected_constraint_count(params: LaplaceParams, d: int) -> int:
    """d * (4 n_lap + nu_z + 3)."""
    return d * (4 * params.n_lap + params.zero_params.nu + 3)


def build_constraints(params: LaplaceParams, d: int, field_: PrimeField = BLS_FIELD) -> ConstraintSystem:
    layout = layout_for(params, d)
    N = layout.N
    if N.bit_length() - 1 + 2 > field_.two_adicity:
        raise ParameterError(f"circuit of {N} rows exceeds the field's 2-adicity")
    public = {name: [0] * N for name in SELECTORS + ("K", "M")}
    nu_z = params.zero_params.nu
    sign_slot = nu_z
    for j in range(d):
        for slot in range(layout.n_lap):
            row = layout.row(j, slot)
            public["SEL_BIT"][row] = 1
            public["K"][row] = layout.lprf_index(j, slot)
            public["SEL_ACC" if slot < layout.n_lap - 1 else "SEL_ACC_END"][row] = 1
        # Bernoulli chains: zeroing coin at offset 0, magnitude levels after the sign slot
        chains = [(0, params.zero_params)]
        offset = sign_slot + 1
        for i, mp in enumerate(params.mag_params):
            chains.append((offset, mp))
            public["M"][layout.row(j, offset)] = 1 << i
            offset += mp.nu
        for start, bp in chains:
            for i in range(bp.nu):
                row = layout.row(j, start + i)
                if i == bp.nu - 1:
                    public["SEL_INIT"][row] = 1
                elif bp.beta[i]:
                    public["SEL_OR"][row] = 1
                else:
                    public["SEL_AND"][row] = 1
        for slot in range(sign_slot):
            public["SEL_SG_COPY"][layout.row(j, slot)] = 1
        public["SEL_SIGN"][layout.row(j, sign_slot)] = 1
        public["SEL_BASE"][layout.row(j, 0)] = 1
    exponent = N.bit_length() - 1
    cs = ConstraintSystem(
        params=params,
        layout=layout,
        domain=domain_generate(exponent, field_),
        share_domain=domain_generate(layout.D.bit_length() - 1, field_),
        public=public,
        gates=_gates(field_.qnr),
        field=field_,
    )
    logger.debug("Built constraint system d=%d n_lap=%d N=%d constraints=%d", d, layout.n_lap, N, cs.num_constraints)
    return cs


# Witness


def assign_witness(
    cs: ConstraintSystem,
    lprf: LprfOutput,
    traces: Sequence[LapTrace],
    bits: Optional[Sequence[int]] = None,
) -> Dict[str, List[int]]:
    """Evaluation columns over the N-row domain for one server's computation."""
    layout, p = cs.layout, cs.field.modulus
    bits = list(lprf.bits) if bits is None else list(bits)
    N = layout.N
    cols = {name: [0] * N for name in LPRF_COLUMNS + LAP_COLUMNS}
    cols["S"] = [lprf.seed % p] * N
    nu_z = cs.params.zero_params.nu
    for j, trace in enumerate(traces):
        base = layout.row(j, 0)
        for slot in range(layout.n_lap):
            k = layout.lprf_index(j, slot)
            cols["B"][base + slot] = bits[k]
            cols["W"][base + slot] = lprf.witnesses[k]
        for i, r in enumerate(trace.bz_trace):
            cols["R"][base + i] = r
        offset = nu_z + 1
        for mag_trace in trace.mag_traces:
            for i, r in enumerate(mag_trace):
                cols["R"][base + offset + i] = r
            offset += len(mag_trace)
        acc = 1
        for slot in range(layout.n_lap - 1, -1, -1):
            acc += cs.public["M"][base + slot] * cols["R"][base + slot]
            cols["A"][base + slot] = acc
        for slot in range(nu_z + 1):
            cols["SG"][base + slot] = trace.s_bit
        cols["AUX"][base] = trace.sign * trace.magnitude % p
        cols["NOISE"][base] = trace.noise % p
    return cols


def io_columns(cs: ConstraintSystem, x_share: Sequence[int], y_share: Sequence[int]) -> Dict[str, List[int]]:
    """X and Y as N-row columns (values on the base rows only)."""
    N = cs.N
    cols = {"X": [0] * N, "Y": [0] * N}
    for j in range(cs.layout.d):
        row = cs.layout.row(j, 0)
        cols["X"][row] = x_share[j] % cs.field.modulus
        cols["Y"][row] = y_share[j] % cs.field.modulus
    return cols


def check_witness(cs: ConstraintSystem, columns: Dict[str, List[int]]) -> List[Tuple[str, int]]:
    """Gate-by-gate evaluation; returns every (gate, row) that does not vanish."""
    p, N = cs.field.modulus, cs.N
    failures = []
    for row in range(N):
        nxt = (row + 1) % N
        values = {name: col[row] for name, col in columns.items()}
        values.update({name: col[row] for name, col in cs.public.items()})
        for name in ("R", "A", "SG"):
            if name in columns:
                values[name + "+"] = columns[name][nxt]
        for gate in cs.gates:
            if cs.public[gate.selector][row] and gate.expr(values) % p:
                failures.append((gate.name, row))
    return failures


# Column polynomials


@dataclass
class ColumnPoly:
    """Blinded column polynomial with its hiding mask."""

    coeffs: List[int]
    mask: List[int]

    def commit(self, pp: PublicParams) -> Commitment:
        return kzg_commit(self.coeffs, self.mask, pp)


def column_poly(evals: Sequence[int], domain: EvalDomain, rng: Rng, blind_terms: int = 2,
                mask_degree: Optional[int] = None) -> Tuple[ColumnPoly, List[int]]:
    """ntt(evals) + Z_N * (b_0 + b_1 X + ...); returns the poly and the blinding scalars."""
    if mask_degree is None:
        from vddp.config import get_mask_degree

        mask_degree = get_mask_degree()
    f = domain.field
    blinds = rng.scalars(blind_terms)
    coeffs = ntt([v % f.modulus for v in evals], domain)
    z = vanishing_poly(domain.size, f)
    for i, b in enumerate(blinds):
        coeffs = poly_add(coeffs, [0] * i + [c * b % f.modulus for c in z], f)
    return ColumnPoly(coeffs, rng.scalars(mask_degree + 1)), blinds


# Quotient argument


def _coset_evals(coeffs: Sequence[int], ext: EvalDomain, shift: int) -> List[int]:
    return intt(poly_scale_input(coeffs, shift, ext.field), ext)


def compute_quotient(
    cs: ConstraintSystem,
    group: str,
    polys: Dict[str, List[int]],
    y_share: Sequence[int],
    eta: int,
) -> List[int]:
    """Q = (sum_c eta^c * sel_c * gate_c) / (X^N - 1), computed on a coset of the 4N domain."""
    f = cs.field
    p = f.modulus
    N = cs.N
    ext = domain_generate(cs.domain.log_size + (BLOWUP.bit_length() - 1), f)
    shift = f.generator
    omega = cs.domain.omega
    gates = cs.gates_of(group)

    ext_cols: Dict[str, List[int]] = {}
    for name in GROUP_COLUMNS[group]:
        ext_cols[name] = _coset_evals(polys[name], ext, shift)
    for name in GROUP_SHIFTED[group]:
        ext_cols[name + "+"] = _coset_evals(poly_scale_input(polys[name], omega, f), ext, shift)
    for name in {g.selector for g in gates} | {"K", "M"}:
        ext_cols[name] = _coset_evals(cs.public_poly(name), ext, shift)
    if group == "lap":
        ext_cols["Y"] = _coset_evals(ntt(_padded_y(cs, y_share), cs.share_domain), ext, shift)

    # x^N on the coset takes BLOWUP distinct values
    shift_n = pow(shift, N, p)
    z_inv = f.batch_inv([(shift_n * pow(ext.omega, i * N, p) - 1) % p for i in range(BLOWUP)])
    eta_powers = [pow(eta, c, p) for c in range(len(gates))]
    q_evals = []
    for i in range(ext.size):
        values = {name: col[i] for name, col in ext_cols.items()}
        acc = 0
        for c, gate in enumerate(gates):
            sel = values[gate.selector]
            if sel:
                acc += eta_powers[c] * sel * gate.expr(values)
        q_evals.append(acc % p * z_inv[i % BLOWUP] % p)
    quotient = poly_scale_input(ntt(q_evals, ext), pow(shift, -1, p), f)
    quotient = poly_trim(quotient)
    if len(quotient) > cs.quotient_length:
        logger.debug("Quotient of degree %d exceeds the bound; constraints do not hold", len(quotient) - 1)
        quotient = quotient[: cs.quotient_length]
    return quotient


def _padded_y(cs: ConstraintSystem, y_share: Sequence[int]) -> List[int]:
    p = cs.field.modulus
    return [y % p for y in y_share] + [0] * (cs.layout.D - len(y_share))


def gate_combination(cs: ConstraintSystem, group: str, values: Dict[str, int], u: int, eta: int) -> int:
    """sum_c eta^c * sel_c(u) * gate_c(values) for values taken at u."""
    p = cs.field.modulus
    acc = 0
    power = 1
    for gate in cs.gates_of(group):
        sel = poly_eval(cs.public_poly(gate.selector), u, cs.field)
        acc += power * sel * gate.expr(values)
        power = power * eta % p
    return acc % p


def _public_at(cs: ConstraintSystem, group: str, u: int, y_share: Sequence[int]) -> Dict[str, int]:
    values = {name: poly_eval(cs.public_poly(name), u, cs.field) for name in ("K", "M")}
    if group == "lap":
        values["Y"] = lagrange_eval(_padded_y(cs, y_share), cs.share_domain, u)
    return values


def _send_opening(tr: Transcript, label: str, value: int, opening: KzgOpening) -> None:
    tr.send_scalar(f"{label}.value", value)
    tr.send_scalar(f"{label}.rho", opening.rho)
    tr.send_point(f"{label}.gamma", opening.gamma)


def _read_opening(reader: TranscriptReader, label: str) -> Tuple[int, KzgOpening]:
    value = reader.read_scalar(f"{label}.value")
    rho = reader.read_scalar(f"{label}.rho")
    gamma = reader.read_point(f"{label}.gamma")
    return value, KzgOpening(rho=rho, gamma=gamma)


def prove_circuit(
    tr: Transcript,
    cs: ConstraintSystem,
    group: str,
    columns: Dict[str, ColumnPoly],
    y_share: Sequence[int],
    pp: PublicParams,
    rng: Rng,
    label: str,
    tamper: FrozenSet[str] = NO_TAMPER,
    mask_degree: Optional[int] = None,
) -> None:
    """Quotient commitment followed by openings of every group column at u (and omega * u)."""
    f = cs.field
    p = f.modulus
    if pp.max_degree < cs.required_degree:
        raise ParameterError(f"degree overflow: circuit needs degree {cs.required_degree}, setup has {pp.max_degree}")
    eta = tr.challenge(f"{label}.eta")
    quotient = compute_quotient(cs, group, {k: v.coeffs for k, v in columns.items()}, y_share, eta)
    if mask_degree is None:
        from vddp.config import get_mask_degree

        mask_degree = get_mask_degree()
    q_poly = ColumnPoly(quotient, rng.scalars(mask_degree + 1))
    tr.send_point(f"{label}.com_q", q_poly.commit(pp))

    u = None
    for _ in range(EVSC_MAX_RETRIES):
        u = tr.challenge(f"{label}.u")
        if pow(u, cs.N, p) == 1:
            tr.send_flag(f"{label}.retry", 1)
            continue
        tr.send_flag(f"{label}.retry", 0)
        break
    omega_u = u * cs.domain.omega % p

    for name in GROUP_COLUMNS[group]:
        col = columns[name]
        value, opening = kzg_open(col.coeffs, col.mask, u, pp)
        if "circuit.eval" in tamper and name == "NOISE":
            value = (value + 1) % p
        _send_opening(tr, f"{label}.{name}", value, opening)
    for name in GROUP_SHIFTED[group]:
        col = columns[name]
        value, opening = kzg_open(col.coeffs, col.mask, omega_u, pp)
        _send_opening(tr, f"{label}.{name}+", value, opening)
    value, opening = kzg_open(q_poly.coeffs, q_poly.mask, u, pp)
    _send_opening(tr, f"{label}.Q", value, opening)


def verify_circuit(
    reader: TranscriptReader,
    cs: ConstraintSystem,
    group: str,
    commitments: Dict[str, Commitment],
    y_share: Sequence[int],
    pp: PublicParams,
    label: str,
) -> bool:
    p = cs.field.modulus
    eta = reader.challenge(f"{label}.eta")
    com_q = reader.read_point(f"{label}.com_q")
    u = None
    for _ in range(EVSC_MAX_RETRIES):
        u = reader.challenge(f"{label}.u")
        if reader.read_flag(f"{label}.retry") == 0:
            break
    else:
        logger.info("Circuit %s exhausted evaluation-point retries", label)
        return False
    if pow(u, cs.N, p) == 1:
        logger.info("Circuit %s: evaluation point lies on the domain", label)
        return False
    omega_u = u * cs.domain.omega % p

    values: Dict[str, int] = {}
    checks: List[Tuple[str, Commitment, int, int, KzgOpening]] = []
    for name in GROUP_COLUMNS[group]:
        value, opening = _read_opening(reader, f"{label}.{name}")
        values[name] = value
        checks.append((name, commitments[name], u, value, opening))
    for name in GROUP_SHIFTED[group]:
        value, opening = _read_opening(reader, f"{label}.{name}+")
        values[name + "+"] = value
        checks.append((name + "+", commitments[name], omega_u, value, opening))
    q_value, q_opening = _read_opening(reader, f"{label}.Q")
    checks.append(("Q", com_q, u, q_value, q_opening))

    values.update(_public_at(cs, group, u, y_share))
    lhs = gate_combination(cs, group, values, u, eta)
    if lhs != q_value * ((pow(u, cs.N, p) - 1) % p) % p:
        logger.info("Circuit %s: constraint identity fails at the evaluation point", label)
        return False
    for name, com, point, value, opening in checks:
        if not kzg_verify(com, point, value, opening, pp):
            logger.info("Circuit %s: opening of %s failed", label, name)
            return False
    return True


def committed_circuit_protocol(
    cs: ConstraintSystem,
    group: str,
    columns: Dict[str, ColumnPoly],
    commitments: Dict[str, Commitment],
    y_share: Sequence[int],
    pp: PublicParams,
    rng: Optional[Rng] = None,
    source: Optional[ChallengeSource] = None,
    tamper: FrozenSet[str] = NO_TAMPER,
    label: str = "circuit",
) -> Tuple[bool, Transcript]:
    """Prover holds the masked columns, the verifier only their commitments."""
    return _run(
        lambda tr, prng: prove_circuit(tr, cs, group, columns, y_share, pp, prng, label, tamper=tamper),
        lambda reader: verify_circuit(reader, cs, group, commitments, y_share, pp, label),
        pp, rng, source, f"vddp.{label}",
    )
