"""Printed Stein operators used as golden regression targets.

Coefficients are transcribed verbatim, lowest derivative first.  Targets use
the ``H<n>`` sum notation understood by :func:`steinalg.io.parse_target`.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Fixture:
    name: str
    target: str
    mode: str
    coeffs: tuple[str, ...]
    source: str
    corrected: tuple[str, ...] | None = None
    note: str = ""

    @property
    def T(self) -> int:
        return len(self.coeffs) - 1

    @property
    def valid_coeffs(self) -> tuple[str, ...]:
        """The coefficients that actually form a Stein operator (erratum applied)."""
        return self.corrected or self.coeffs


FIXTURES: tuple[Fixture, ...] = (
    Fixture("H1_cy", "H1", "cy", ("y", "-1"), "Hermite table"),
    Fixture("H2_cy", "H2", "cy", ("y", "-2*y-2"), "Hermite table"),
    Fixture(
        "H3_cy_T4",
        "H3",
        "cy",
        ("5*y", "-3*y^2-12", "207*y", "351*y^2-1080", "81*y^3-324*y"),
        "Hermite table, minimal order",
    ),
    Fixture(
        "H3_cy_T5",
        "H3",
        "cy",
        ("y", "-6", "-99*y", "216-27*y^2", "486*y", "486*y^2-1944"),
        "Hermite table, minimal degree",
    ),
    Fixture(
        "H4_cy",
        "H4",
        "cy",
        ("y", "-24-44*y", "576+144*y-16*y^2", "192*y^2+576*y-3456"),
        "Hermite table",
    ),
    Fixture(
        "H5_cy_T6",
        "H5",
        "cy",
        (
            "15580403168538081808023552*y",
            "-319179359200955*y^8+17296743383000046809080*y^6-30453944634963174391774080*y^4"
            "+8378454869686262588172134400*y^2-171397515591740804005791498240",
            "16154152521786318001600*y^7-41918287476242535868569600*y^5"
            "+18160711517167770618284313600*y^3-1239101680729174664564404224000*y",
            "5177408385598691055000*y^8-19166255615207862008920000*y^6+13403727175244880138330240000*y^4"
            "-2442403318372552645917235200000*y^2+65725928416658664921713541120000",
            "724337658286667253125*y^9-3713592558790019185200000*y^7+4280839659909236338428000000*y^5"
            "-1379071236058382967127603200000*y^3+66328376785356945138012979200000*y",
            "44884597387634296875*y^10-310405490799058194000000*y^8+580995055104909396324000000*y^6"
            "-283708061282453615759001600000*y^4+33287571883579035278551449600000*y^2"
            "-906872445506697193065598156800000",
            "997435497502984375*y^11-9089418036906323000000*y^9+26589273781119330420000000*y^7"
            "-19596186937165037285376000000*y^5+4565266162550649874870272000000*y^3"
            "-190391529130477012565360640000000*y",
        ),
        "Hermite table, minimal order",
    ),
    Fixture(
        "H5_cy_T13",
        "H5",
        "cy",
        (
            "y",
            "-120",
            "-75325*y",
            "-81875*y^2+7704000",
            "-31250*y^3+270600000*y",
            "-3125*y^4+527800000*y^2-39086400000",
            "280000000*y^3-155065000000*y",
            "35000000*y^4-241335000000*y^2+14306880000000",
            "-198750000000*y^3+53403600000000*y",
            "-33125000000*y^4+34950000000000*y^2-1170432000000000",
            "39000000000000*y^3-10843200000000000*y",
            "9750000000000*y^4-6696000000000000*y^2+352512000000000000",
            "-2160000000000000*y^3+622080000000000000*y",
            "-1080000000000000*y^4+622080000000000000*y^2-29859840000000000000",
        ),
        "Hermite table, minimal degree",
    ),
    Fixture(
        "H6_cy_T4",
        "H6",
        "cy",
        (
            "599*y",
            "-218*y^3+913612*y^2+53550492*y-281527920",
            "1336776*y^3+104875908*y^2-1387746360*y-28764115200",
            "494424*y^4+41703336*y^3-1035418680*y^2-29104855200*y+158972544000",
            "47088*y^5+3490128*y^4-321541920*y^3-16820071200*y^2+241351488000*y+6178654080000",
        ),
        "Hermite table, minimal order",
    ),
    Fixture(
        "H6_cy_T6",
        "H6",
        "cy",
        (
            "y",
            "-1278*y-720",
            "-972*y^2+103320*y+756000",
            "-216*y^3+228960*y^2+16491600*y-120528000",
            "71280*y^3+6771600*y^2-307152000*y-3265920000",
            "-314928000*y^2-19945440000*y+125971200000",
            "-209952000*y^3-19945440000*y^2+251942400000*y+7558272000000",
        ),
        "Hermite table, minimal degree",
    ),
    Fixture(
        "H3_generic",
        "H3",
        "generic",
        ("290*y-y^3", "528*y^2-1560", "243*y^3-1404*y", "27*y^4-648*y^2+2160"),
        "Hermite table, general mode",
    ),
    Fixture(
        "H4_generic",
        "H4",
        "generic",
        ("-y^2+50*y+24", "64*y^2+72*y-1008", "16*y^3-48*y^2-576*y+1728"),
        "Hermite table, general mode",
    ),
    Fixture(
        "H5_generic",
        "H5",
        "generic",
        (
            "y^9-104800744*y^7+174104044032*y^5-82431615212544*y^3+9617056740900864*y",
            "-83053520*y^8+191761742080*y^6-148596701936640*y^4+33440484399022080*y^2-868706901405204480",
            "-23029125*y^9+72332912000*y^7-88767223008000*y^5+32039796049920000*y^3-1984593650909184000*y",
            "-2831875*y^10+11857320000*y^8-22211556000000*y^6+11983543971840000*y^4"
            "-1826589574103040000*y^2+54875902433034240000",
            "-156250*y^11+855800000*y^9-2353387200000*y^7+1868056934400000*y^5"
            "-530407371571200000*y^3+36302379968102400000*y",
            "-3125*y^12+22000000*y^10-85519200000*y^8+99156326400000*y^6-65065321267200000*y^4"
            "+19243712957644800000*y^2-849260402284953600000",
        ),
        "Hermite table, general mode",
    ),
    Fixture(
        "H6_generic",
        "H6",
        "generic",
        (
            "15303970800*y-252586320*y^2-6227803*y^3+599*y^4",
            "-6722792640000-28723248000*y+30858084000*y^2-247410960*y^3-6390132*y^4",
            "-25152249600000-8314215840000*y+29111400000*y^2+14157844200*y^3-43020180*y^4-1746684*y^5",
            "1173771648000000+27946944000000*y-3912572160000*y^2-13197168000*y^3+1633473000*y^4-129384*y^6",
        ),
        "Hermite table, general mode",
        corrected=(
            "22771584000+15303970800*y-252586320*y^2-6227803*y^3+599*y^4",
            "-6722792640000-28723248000*y+30858084000*y^2-247410960*y^3-6390132*y^4",
            "-25152249600000-8314215840000*y+29111400000*y^2+14157844200*y^3-43020180*y^4-1746684*y^5",
            "1173771648000000+27946944000000*y-3912572160000*y^2-13197168000*y^3+1633473000*y^4-129384*y^6",
        ),
        note="printed p_0 omits its constant term 22771584000; without it E[S f(Y)] != 0 already for f = 1",
    ),
    Fixture("H1+H2", "H1+H2", "cy", ("y", "-4*y-3", "4*y+5"), "sum-target table (a)"),
    Fixture(
        "H1+H2+H3",
        "H1+H2+H3",
        "cy",
        ("y", "-4*y-9", "-92*y-43", "-27*y^2+82*y+119", "27*y^2+392*y+49", "378*y^2+196*y-686"),
        "sum-target table (b)",
    ),
    Fixture(
        "H2+H3_T4",
        "H2+H3",
        "cy",
        ("134*y", "-81*y^2-172*y-424", "243*y^2+6276*y+1056", "9504*y^2+1292*y-40296", "2187*y^3+2214*y^2-12364*y-13912"),
        "sum-target table (c), first",
    ),
    Fixture(
        "H2+H3_T5",
        "H2+H3",
        "cy",
        ("y", "-4*y-8", "-98*y-26", "-27*y^2+118*y+324", "27*y^2+536*y-188", "540*y^2-80*y-2960"),
        "sum-target table (c), second",
    ),
    Fixture(
        "H1+H2+H3+H4",
        "H1+H2+H3+H4",
        "cy",
        (
            "8*y",
            "-633*y-264",
            "-256*y^2+17392*y+16033",
            "16928*y^2-49627*y-233513",
            "2048*y^3-215304*y^2-707732*y+1361327",
            "-45312*y^3+156709*y^2-408426*y-1868559",
            "220928*y^3+8481141*y^2+37742788*y-15880534",
            "2062080*y^3-2592195*y^2-95069510*y-125583700",
            "-12613120*y^3-99870290*y^2-29364920*y+678349360",
        ),
        "sum-target table (d)",
    ),
    Fixture(
        "H1+H4",
        "H1+H4",
        "cy",
        (
            "y",
            "-10*y-25",
            "-32*y^2-600*y+186",
            "192*y^2+17706*y+12888",
            "256*y^3+45312*y^2+346032*y-486783",
            "7680*y^3-362304*y^2-2741472*y+1001322",
            "-129024*y^3+145152*y^2+8273664*y+11580408",
            "870912*y^3+7838208*y^2-2939328*y-88087986",
        ),
        "sum-target table (e)",
    ),
    Fixture("H2+H4", "H2+H4", "cy", ("y", "-42*y-26", "-16*y^2+124*y+316", "160*y^2+360*y-1360"), "sum-target table (f)"),
    Fixture(
        "H3+H4",
        "H3+H4",
        "cy",
        (
            "8*y",
            "-649*y-240",
            "-256*y^2+18670*y+17646",
            "17440*y^2-66183*y-441024",
            "2048*y^3-258888*y^2-759228*y+4060134",
            "-49408*y^3+1032645*y^2+6790131*y-12082662",
            "460032*y^3+6676839*y^2+13811904*y-80220780",
            "576000*y^3-473202*y^2-43174782*y-90319212",
            "-4243968*y^3-43417782*y^2-1790424*y+658876032",
        ),
        "sum-target table (g)",
    ),
    Fixture("X^4-3", "x^4-3", "cy", ("y", "-32*y-96", "-16*y^2-96*y-144"), "sum-target table, closing remark"),
    Fixture("X^3", "x^3", "cy", ("y", "-15", "-81*y", "-27*y^2"), "sum-target table, closing remark"),
)


def by_name(name: str) -> Fixture:
    for f in FIXTURES:
        if f.name == name:
            return f
    raise KeyError(name)


# Printed (T, m) pairs per Hermite degree p: for each zero-order mode the
# minimal-order pair and the minimal-degree pair.
TABLE_PAIRS: dict[int, dict[str, tuple[tuple[int, int], tuple[int, int]]]] = {
    1: {"generic": ((1, 1), (1, 1)), "cy": ((1, 1), (1, 1))},
    2: {"generic": ((1, 1), (1, 1)), "cy": ((1, 1), (1, 1))},
    3: {"generic": ((3, 4), (5, 2)), "cy": ((4, 3), (5, 2))},
    4: {"generic": ((2, 3), (3, 2)), "cy": ((3, 2), (3, 2))},
    5: {"generic": ((5, 12), (13, 4)), "cy": ((6, 11), (13, 4))},
    6: {"generic": ((3, 6), (6, 3)), "cy": ((4, 5), (6, 3))},
    7: {"generic": ((7, 24), (25, 6)), "cy": ((8, 23), (25, 6))},
    8: {"generic": ((4, 10), (10, 4)), "cy": ((5, 9), (10, 4))},
    9: {"generic": ((9, 40), (41, 8)), "cy": ((10, 39), (41, 8))},
    10: {"generic": ((5, 15), (15, 5)), "cy": ((6, 14), (15, 5))},
}

# (p, T, m) cells reported as infeasible in cy mode.
INFEASIBLE_PROBES: tuple[tuple[int, int, int], ...] = ((4, 2, 60), (5, 5, 80))
