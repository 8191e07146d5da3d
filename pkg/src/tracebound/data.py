"""
Packaged certificates and witnesses

Coefficient tables of the four case-B separating polynomials, the two
33-point case-B witness sets, the three case-A optimal measures and the
case-A proof polynomials. All decimals are exact and stored as the strings
they were published with.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .exact import parse_decimal, parse_rational, to_rational
from .exceptions import InputError
from .poly import Poly2
from .region import Region, SymmetricAtom, parse_inline, parse_point
from .utils import exact_decimal_string

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"

# (i, j, coefficient of x^i y^j) with j <= i; the mirrored term shares it.
Q_TABLE: Tuple[Tuple[int, int, str], ...] = (
    (1, 0, "-12.543"),
    (2, 0, "53.838"),
    (3, 0, "-12.954"),
    (4, 0, "-13.063"),
    (5, 0, "-7.914"),
    (6, 0, "-2.9"),
    (7, 0, "3.607"),
    (8, 0, "1.575"),
    (1, 1, "124.68"),
    (2, 1, "-183.789"),
    (3, 1, "1.878"),
    (4, 1, "50.255"),
    (2, 2, "117.628"),
    (3, 2, "73.149"),
    (4, 2, "-48.646"),
    (3, 3, "-65.928"),
    (4, 3, "8.734"),
    (4, 4, "1.098"),
)

R_TABLE: Tuple[Tuple[int, int, str], ...] = (
    (2, 0, "-24.04"),
    (4, 0, "39.64"),
    (6, 0, "-13.14"),
    (8, 0, "3.82"),
    (1, 1, "-15.76"),
    (3, 1, "-119.88"),
    (2, 2, "484.32"),
    (4, 2, "-153.28"),
    (3, 3, "192.44"),
    (4, 4, "8.2"),
)

P1_TABLE: Tuple[Tuple[int, int, str], ...] = (
    (0, 0, "0"),
    (1, 0, "-9.6430622783853"),
    (1, 1, "108.9702541224326"),
    (2, 0, "49.2216326267277"),
    (2, 1, "-180.0171980017891"),
    (2, 2, "125.0609266454326"),
    (3, 0, "-9.225013979636"),
    (3, 1, "6.9445854923998"),
    (3, 2, "68.1838852970187"),
    (3, 3, "-66.0585984730189"),
    (4, 0, "-11.7940568488902"),
    (4, 1, "49.3497768306"),
    (4, 2, "-48.7776655621495"),
    (4, 3, "9.217112694634"),
    (4, 4, "1"),
    (5, 0, "-10.4048835085938"),
    (6, 0, "-3.4018229998967"),
    (7, 0, "4.1057063608821"),
    (8, 0, "1.7252053549918"),
)

P2_TABLE: Tuple[Tuple[int, int, str], ...] = (
    (0, 0, "0"),
    (1, 0, "0"),
    (1, 1, "-0.9148488345531369"),
    (2, 0, "-2.0489539067392863"),
    (2, 1, "0"),
    (2, 2, "44.9702636684728257"),
    (3, 0, "0"),
    (3, 1, "-10.7425748658745577"),
    (3, 2, "0"),
    (3, 3, "16.8692193520802346"),
    (4, 0, "3.6839213331709682"),
    (4, 1, "0"),
    (4, 2, "-14.3548663298347627"),
    (4, 3, "0"),
    (4, 4, "1"),
    (5, 0, "0"),
    (6, 0, "-1.4264194026272393"),
    (7, 0, "0"),
    (8, 0, "0.4106920221952855"),
)

SUM_WITNESS_POINTS: Tuple[Tuple[str, str], ...] = (
    ("0.40233388785758", "-0.68162727157206"),
    ("-0.68162490825764", "0.40233317377632"),
    ("-0.03593446385013", "1.4223373527278"),
    ("-0.58181793464029", "1.65045045907013"),
    ("0.59759350821447", "-1.78077844166752"),
    ("1.53829446803677", "1.53829443533382"),
    ("-1.48621983094263", "1.99140650840038"),
    ("1.42233731135369", "-0.03593490350603"),
    ("0.05438775487699", "0.05438886977203"),
    ("-1.78077900893326", "0.59759354704086"),
    ("1.99140617335252", "-1.4862186561741"),
    ("-1.40798021804983", "-1.06840257328206"),
    ("0.59759347905152", "-1.78077910495742"),
    ("-1.48621965507992", "1.99140661320125"),
    ("1.12294676572784", "1.12294624842174"),
    ("1.42233869303903", "-0.03593747650892"),
    ("1.65045062298356", "-0.58181827821828"),
    ("0.40233336753712", "-0.6816247052117"),
    ("-0.68162690245729", "0.40233386944888"),
    ("0.40233322519093", "-0.681625459605"),
    ("1.12294556005286", "1.12294583096732"),
    ("-0.03593985561373", "1.42233955543634"),
    ("-0.58181951983038", "1.65045131684197"),
    ("1.99140650540332", "-1.48621961266743"),
    ("1.65045237751894", "-0.58182231464692"),
    ("-1.78077877657724", "0.59759334939547"),
    ("-1.06840211927449", "-1.4079806720575"),
    ("1.53829124404177", "1.53829176844063"),
    ("-1.40797805061751", "-1.06840474071448"),
    ("1.9914061436234", "-1.48622121985896"),
    ("0.59759450830252", "-1.7807799162483"),
    ("-1.4862239646326", "1.99140795748714"),
    ("-1.40798623761224", "-1.06839655371975"),
)

PRODUCT_WITNESS_POINTS: Tuple[Tuple[str, str], ...] = (
    ("0.15506049352336642", "0.82103437036363329"),
    ("-1.07751316618925008", "-2"),
    ("-0.55343613654977384", "-1.64723374649387681"),
    ("-0.15506048529352139", "-0.82103434384587391"),
    ("1.64723372391649941", "0.5534361137417255"),
    ("-1.9731805874505989", "-2"),
    ("0.82103437282171523", "0.15506048372780666"),
    ("1.07134858923922885", "-1.47342166359409476"),
    ("-0.82103433524791835", "-0.15506047870672044"),
    ("0.15506046708915971", "0.82103431347805562"),
    ("2", "1.07751316910812552"),
    ("-2", "-1.07751316683949198"),
    ("1.64723377312861428", "0.55343615943553201"),
    ("0.55343612726989892", "1.64723373754207403"),
    ("1.97318058013085052", "2"),
    ("1.07751316252419741", "2"),
    ("0.82103432514680383", "0.1550604774370247"),
    ("1.07134859824340295", "-1.47342165121068827"),
    ("-1.64723372758280026", "-0.5534361192094094"),
    ("-1.64723373704703668", "-0.55343612092654846"),
    ("-0.15506049299061308", "-0.82103439731133801"),
    ("-2", "-1.97318058198809136"),
    ("2", "1.9731805809913704"),
    ("1.47342165529506514", "-1.07134859527358692"),
    ("1.07751320597324756", "2"),
    ("-1.47342164800053422", "1.07134860057755775"),
    ("-2", "-1.97318060745136972"),
    ("-1.47342169316353921", "1.07134856773881076"),
    ("-1.0713485853406953", "1.47342166895573339"),
    ("-1.0775132033440292", "-2"),
    ("1.64723371168303767", "0.55343607239179169"),
    ("2", "1.97318056276917512"),
    ("1.07134859374131587", "-1.47342165740239169"),
)

# Bounds that the two 33-point witness sets respect.
SUM_WITNESS_BOUND = "-2.4763827913320"
PRODUCT_WITNESS_BOUND = "-1.5785482206460513"

# Bounds at which P1 and P2 separate.
P1_BOUND = "-2.4763827913319"
P2_BOUND = "-1.578548220646049"

CASE_A_EPSILON = Fraction(1, 100)


def table_digest(table: Sequence[Tuple[int, int, str]]) -> str:
    """sha256 of the table as "i,j,coeff" lines"""
    text = "".join(f"{i},{j},{c}\n" for i, j, c in table)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def points_digest(points: Sequence[Tuple[str, str]]) -> str:
    """sha256 of the point list as "x,y" lines"""
    text = "".join(f"{x},{y}\n" for x, y in points)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# case-A proof polynomials


def sum_separator_a(eps: Fraction = CASE_A_EPSILON) -> Poly2:
    """(2-s)(2-t)(3s+3t+2-eps): nonnegative where s+t >= -2/3 + eps/3"""
    s, t = Poly2.x(), Poly2.y()
    return (2 - s) * (2 - t) * (3 * s + 3 * t + (2 - eps))


def product_min_separator_a(eps: Fraction = CASE_A_EPSILON) -> Poly2:
    """(5st+6-eps)(4-st): nonnegative where st >= -6/5 + eps/5"""
    st = Poly2.x() * Poly2.y()
    return (5 * st + (6 - eps)) * (4 - st)


def product_max_separator_a(eps: Fraction = CASE_A_EPSILON) -> Poly2:
    """-(3st+2+eps)(st+4): nonnegative where st <= -2/3 - eps/3"""
    st = Poly2.x() * Poly2.y()
    return -((3 * st + (2 + eps)) * (st + 4))


@dataclass(frozen=True)
class PackagedPolynomial:
    """A named certificate with the region and case it is meant for"""
    name: str
    case: str
    region: str
    build: Callable[[], Poly2]
    mirror: Optional[Tuple[int, int]]
    description: str

    def poly(self) -> Poly2:
        return self.build()

    def default_region(self) -> Region:
        return parse_inline(self.region)


def _eps_region(form: str, op: str, bound: Fraction) -> str:
    return f"{form}{op}{bound.numerator}/{bound.denominator}"


POLYNOMIALS: Dict[str, PackagedPolynomial] = {
    p.name: p
    for p in (
        PackagedPolynomial(
            "q", "b", "sum>=-2.47", lambda: Poly2.symmetric_from_table(Q_TABLE), (-1, -1),
            "a1_min <= -2.47",
        ),
        PackagedPolynomial(
            "r", "b", "product>=-1.57", lambda: Poly2.symmetric_from_table(R_TABLE), (-1, 1),
            "a2_min <= 0.43",
        ),
        PackagedPolynomial(
            "p1", "b", f"sum>={P1_BOUND}", lambda: Poly2.symmetric_from_table(P1_TABLE), (-1, -1),
            "a1_min <= -2.4763827913319",
        ),
        PackagedPolynomial(
            "p2", "b", f"product>={P2_BOUND}", lambda: Poly2.symmetric_from_table(P2_TABLE), (-1, 1),
            "a2_min <= 0.421451779353951",
        ),
        PackagedPolynomial(
            "a-sum", "a", _eps_region("sum", ">=", Fraction(-2, 3) + CASE_A_EPSILON / 3), sum_separator_a, (-1, -1),
            "a1_min <= -2/3",
        ),
        PackagedPolynomial(
            "a-product-min", "a", _eps_region("product", ">=", Fraction(-6, 5) + CASE_A_EPSILON / 5), product_min_separator_a,
            None, "a2_min <= 4/5",
        ),
        PackagedPolynomial(
            "a-product-max", "a", _eps_region("product", "<=", Fraction(-2, 3) - CASE_A_EPSILON / 3), product_max_separator_a,
            None, "a2_max >= 4/3",
        ),
    )
}


@dataclass(frozen=True)
class PackagedMeasure:
    """A named witness: atoms, optional weights and the region they live on"""
    name: str
    case: str
    region: str
    atoms: Tuple
    weights: Optional[Tuple[Fraction, ...]]

    def default_region(self) -> Region:
        return parse_inline(self.region)


def _points(raw: Sequence[Tuple[str, str]]) -> Tuple[Tuple[Fraction, Fraction], ...]:
    return tuple((parse_decimal(x), parse_decimal(y)) for x, y in raw)


def _pair(s, t) -> SymmetricAtom:
    return SymmetricAtom.from_pair(Fraction(s), Fraction(t))


# The irrational atoms enter through (e1, e2) = (s + t, s t).
MEASURES: Dict[str, PackagedMeasure] = {
    m.name: m
    for m in (
        PackagedMeasure(
            "a1-opt", "a", "sum>=-2/3",
            (_pair(0, 2), _pair(Fraction(-3, 2), 2), SymmetricAtom(Fraction(-2, 3), Fraction(-2, 3))),
            (Fraction(1, 6), Fraction(4, 21), Fraction(9, 14)),
        ),
        PackagedMeasure(
            "a2max-opt", "a", "product<=-2/3",
            (_pair(-2, 2), _pair(Fraction(-1, 3), 2), SymmetricAtom(Fraction(-2, 3), Fraction(-2, 3))),
            (Fraction(1, 10), Fraction(9, 35), Fraction(9, 14)),
        ),
        PackagedMeasure(
            "a2min-opt", "a", "product>=-6/5",
            (
                _pair(2, 2),
                _pair(-2, -2),
                _pair(Fraction(-3, 5), 2),
                SymmetricAtom(Fraction(-2, 7), Fraction(-6, 5)),
            ),
            (Fraction(1, 52), Fraction(1, 52), Fraction(125, 767), Fraction(1225, 1534)),
        ),
        PackagedMeasure("appendix-a1", "b", f"sum>={SUM_WITNESS_BOUND}", _points(SUM_WITNESS_POINTS), None),
        PackagedMeasure("appendix-a2", "b", f"product>={PRODUCT_WITNESS_BOUND}", _points(PRODUCT_WITNESS_POINTS), None),
    )
}


def _strip(name: str) -> str:
    return name[len(BUILTIN_PREFIX):] if name.startswith(BUILTIN_PREFIX) else name


def is_builtin(source: str) -> bool:
    return source.startswith(BUILTIN_PREFIX)


def builtin_polynomial(name: str) -> PackagedPolynomial:
    key = _strip(name).lower()
    if key not in POLYNOMIALS:
        raise InputError(f"unknown builtin polynomial {name!r}; available: {', '.join(POLYNOMIALS)}")
    return POLYNOMIALS[key]


def builtin_measure(name: str) -> PackagedMeasure:
    key = _strip(name).lower()
    if key not in MEASURES:
        raise InputError(f"unknown builtin point set {name!r}; available: {', '.join(MEASURES)}")
    return MEASURES[key]


def load_polynomial(source: str) -> Poly2:
    """A builtin name ("builtin:q") or a polynomial file path"""
    if is_builtin(source):
        return builtin_polynomial(source).poly()
    try:
        return Poly2.load(source)
    except (OSError, ValueError) as e:
        raise InputError(f"cannot read polynomial file {source}: {str(e)}") from e


# atoms and weights files


class AtomModel(BaseModel):
    """A point {"x", "y"} or a symmetric pair {"e1", "e2"}"""
    model_config = ConfigDict(extra="forbid")

    x: Optional[str] = None
    y: Optional[str] = None
    e1: Optional[str] = None
    e2: Optional[str] = None

    @model_validator(mode="after")
    def one_coordinate_kind(self):
        given = tuple(v is not None for v in (self.x, self.y, self.e1, self.e2))
        if given not in ((True, True, False, False), (False, False, True, True)):
            raise ValueError("an atom has either x and y or e1 and e2")
        return self


class AtomsFileModel(BaseModel):
    """Atoms file format, optionally carrying weights"""
    model_config = ConfigDict(extra="forbid")

    atoms: List[AtomModel] = Field(..., min_length=1)
    weights: Optional[List[str]] = None


class WeightsFileModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    weights: List[str] = Field(..., min_length=1)


def _read_json(path: Union[str, Path], what: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise InputError(f"cannot read {what} file {path}: {str(e)}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{what} file {path} is not valid JSON: {str(e)}") from e


def atoms_from_json(document: Union[str, dict]) -> Tuple[List, Optional[List[Fraction]]]:
    data = json.loads(document) if isinstance(document, str) else document
    model = AtomsFileModel.model_validate(data)
    atoms: List = []
    for a in model.atoms:
        if a.x is not None:
            atoms.append(parse_point(a.x, a.y))
        else:
            atoms.append(SymmetricAtom.of(a.e1, a.e2))
    weights = [parse_rational(w) for w in model.weights] if model.weights is not None else None
    if weights is not None and len(weights) != len(atoms):
        raise InputError(f"{len(atoms)} atoms but {len(weights)} weights")
    return atoms, weights


def load_atoms(path: Union[str, Path]) -> Tuple[List, Optional[List[Fraction]]]:
    return atoms_from_json(_read_json(path, "atoms"))


def load_weights(path: Union[str, Path]) -> List[Fraction]:
    model = WeightsFileModel.model_validate(_read_json(path, "weights"))
    return [parse_rational(w) for w in model.weights]


def atoms_document(atoms: Sequence, weights: Optional[Sequence[Fraction]] = None) -> dict:
    """Atoms file document; decimals where exact, p/q otherwise"""
    rows = []
    for a in atoms:
        if isinstance(a, SymmetricAtom):
            rows.append({"e1": exact_decimal_string(a.e1), "e2": exact_decimal_string(a.e2)})
        else:
            rows.append({"x": exact_decimal_string(to_rational(a[0])), "y": exact_decimal_string(to_rational(a[1]))})
    document = {"atoms": rows}
    if weights is not None:
        document["weights"] = [exact_decimal_string(to_rational(w)) for w in weights]
    return document


def weights_document(weights: Sequence[Fraction]) -> dict:
    return {"weights": [exact_decimal_string(to_rational(w)) for w in weights]}


def load_measure(source: str) -> Tuple[List, Optional[List[Fraction]]]:
    """Atoms and weights (None when absent) from a builtin or an atoms file"""
    if is_builtin(source):
        m = builtin_measure(source)
        return list(m.atoms), list(m.weights) if m.weights is not None else None
    return load_atoms(source)
