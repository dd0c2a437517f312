//! Values as printed in the published argument for `k = 10`.
//!
//! Decimals are kept as the printed strings; comparisons happen at `1e-6`.

/// Anchor intervals `[low, anchor]`, descending.
pub const ANCHOR_INTERVALS: [(u64, u64); 39] = [
    (369_082, 616_000),
    (224_908, 369_081),
    (137_109, 224_907),
    (86_560, 137_108),
    (55_427, 86_559),
    (35_839, 55_426),
    (23_126, 35_838),
    (15_524, 23_125),
    (10_521, 15_523),
    (7_262, 10_520),
    (5_076, 7_261),
    (3_650, 5_075),
    (2_727, 3_649),
    (2_051, 2_726),
    (1_520, 2_050),
    (1_225, 1_519),
    (973, 1_224),
    (761, 972),
    (647, 760),
    (537, 646),
    (436, 536),
    (373, 435),
    (302, 372),
    (276, 301),
    (247, 275),
    (235, 246),
    (231, 234),
    (209, 230),
    (199, 208),
    (196, 198),
    (193, 195),
    (175, 192),
    (153, 174),
    (145, 152),
    (141, 144),
    (126, 140),
    (120, 125),
    (118, 119),
    (117, 117),
];

/// Cumulative bounds printed for the first two anchors.
pub const FIRST_BOUNDS: [&str; 2] = ["0.9999991593207759", "0.9999959672962349"];

/// The count stated alongside the table of `m` with `T_m >= 1`.
pub const STATED_EXCEPTIONAL_COUNT: usize = 77;

/// `(m, T_m)` for every listed `m` in `[6, 116]` with `T_m >= 1`.
pub const SMALL_TABLE: [(u64, &str); 78] = [
    (6, "1.5434041"),
    (7, "1.4225212"),
    (8, "1.3193863"),
    (9, "1.2297478"),
    (10, "1.1492575"),
    (11, "1.0680405"),
    (12, "1.0853025"),
    (13, "1.0257181"),
    (14, "1.2314694"),
    (15, "1.1804546"),
    (16, "1.1265315"),
    (17, "1.0822173"),
    (18, "1.0991689"),
    (19, "1.2221015"),
    (20, "1.2475906"),
    (21, "1.2071602"),
    (22, "1.1687162"),
    (23, "1.1321704"),
    (24, "1.1449396"),
    (25, "1.1196020"),
    (26, "1.0913227"),
    (27, "1.0603527"),
    (28, "1.0341865"),
    (29, "1.0054409"),
    (30, "1.0155426"),
    (33, "1.1196755"),
    (34, "1.0982484"),
    (35, "1.0746092"),
    (36, "1.0573066"),
    (37, "1.0350309"),
    (38, "1.0430168"),
    (39, "1.0507825"),
    (40, "1.0327178"),
    (41, "1.1255515"),
    (42, "1.1327286"),
    (43, "1.1136031"),
    (44, "1.1181906"),
    (45, "1.1044477"),
    (46, "1.0887949"),
    (47, "1.0930962"),
    (48, "1.0993856"),
    (49, "1.0847168"),
    (50, "1.0703532"),
    (51, "1.0562705"),
    (52, "1.0424881"),
    (53, "1.0270561"),
    (54, "1.0326429"),
    (55, "1.0196123"),
    (56, "1.0032162"),
    (59, "1.0824342"),
    (60, "1.0891372"),
    (61, "1.0757682"),
    (62, "1.0790256"),
    (63, "1.0870206"),
    (64, "1.0742800"),
    (65, "1.0648374"),
    (66, "1.0509680"),
    (67, "1.0388285"),
    (68, "1.0447480"),
    (69, "1.0344111"),
    (70, "1.0227899"),
    (71, "1.0113491"),
    (72, "1.0155372"),
    (73, "1.0071561"),
    (74, "1.0098754"),
    (75, "1.0138951"),
    (76, "1.0045179"),
    (95, "1.0010795"),
    (107, "1.0253732"),
    (108, "1.0281605"),
    (109, "1.0225837"),
    (110, "1.0244085"),
    (111, "1.0180358"),
    (112, "1.0198247"),
    (113, "1.0135636"),
    (114, "1.0162068"),
    (115, "1.0091786"),
    (116, "1.0039439"),
];

/// `(lo, hi, factorization)`.
pub type Profile = (u64, u64, &'static [(u64, u32)]);

/// Lcm profiles by range of `m`.
pub const LCM_PROFILES: [Profile; 15] = [
    (6, 9, &[(2, 4), (3, 2), (5, 1), (7, 1)]),
    (10, 10, &[(2, 5), (3, 2), (5, 1), (7, 1)]),
    (11, 14, &[(2, 5), (3, 3), (5, 1), (7, 1)]),
    (15, 19, &[(2, 5), (3, 3), (5, 2), (7, 1), (11, 1)]),
    (20, 30, &[(2, 6), (3, 3), (5, 2), (7, 1), (11, 1), (13, 1)]),
    (33, 38, &[(2, 6), (3, 4), (5, 2), (7, 1), (11, 1), (13, 1), (17, 1)]),
    (39, 39, &[(2, 7), (3, 4), (5, 2), (7, 1), (11, 1), (13, 1), (17, 1)]),
    (40, 41, &[(2, 7), (3, 4), (5, 2), (7, 2), (11, 1), (13, 1), (17, 1)]),
    (42, 56, &[(2, 7), (3, 4), (5, 2), (7, 2), (11, 1), (13, 1), (17, 1), (19, 1)]),
    (59, 59, &[(2, 7), (3, 4), (5, 2), (7, 2), (11, 1), (13, 1), (17, 1), (19, 1)]),
    (60, 74, &[(2, 7), (3, 4), (5, 2), (7, 2), (11, 1), (13, 1), (17, 1), (19, 1), (23, 1)]),
    (75, 76, &[(2, 7), (3, 4), (5, 3), (7, 2), (11, 1), (13, 1), (17, 1), (19, 1), (23, 1)]),
    (95, 95, &[(2, 8), (3, 4), (5, 3), (7, 2), (11, 1), (13, 1), (17, 1), (19, 1), (23, 1)]),
    (107, 108, &[(2, 8), (3, 5), (5, 3), (7, 2), (11, 1), (13, 1), (17, 1), (19, 1), (23, 1), (29, 1)]),
    (109, 116, &[(2, 8), (3, 5), (5, 3), (7, 2), (11, 1), (13, 1), (17, 1), (19, 1), (23, 1), (29, 1), (31, 1)]),
];

/// The published profile for `m`, if the definition block covers it.
pub fn lcm_profile(m: u64) -> Option<&'static [(u64, u32)]> {
    LCM_PROFILES.iter().find(|(lo, hi, _)| (*lo..=*hi).contains(&m)).map(|(_, _, f)| *f)
}

/// Values of `m` left to the case analyses after the divisor-sum filter.
pub const EXCEPTIONAL: [u64; 23] =
    [6, 7, 8, 9, 15, 16, 18, 20, 21, 22, 23, 24, 25, 33, 42, 43, 44, 45, 46, 47, 48, 49, 50];
