//! Reference values computed with SciPy: `stats.spearmanr`, `stats.pearsonr`,
//! `stats.f_oneway`, `stats.tukey_hsd` and `stats.studentized_range`.

pub const PEARSON: ([f64; 4], [f64; 4], f64) = ([1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 5.0, 4.0], 0.7181848464596079);

pub struct SpearmanCase {
    pub x: &'static [f64],
    pub y: &'static [f64],
    pub rho: f64,
    pub p: f64,
}

pub const SPEARMAN: [SpearmanCase; 5] = [
    SpearmanCase {
        x: &[1., 2., 2., 3., 4., 4., 4., 5.],
        y: &[2., 1., 3., 3., 5., 4., 4., 5.],
        rho: 0.9063208090792971,
        p: 0.0019135757577715949,
    },
    SpearmanCase {
        x: &[3., 1., 4., 1., 5., 9., 2., 6.],
        y: &[2., 7., 1., 8., 2., 8., 1., 8.],
        rho: 0.19885368120992467,
        p: 0.6368617833253285,
    },
    SpearmanCase {
        x: &[1., 1., 1., 2., 2., 3., 3., 3.],
        y: &[5., 4., 4., 3., 3., 2., 2., 1.],
        rho: -0.9622504486493761,
        p: 0.00013070665033946933,
    },
    SpearmanCase {
        x: &[10., 20., 30., 40., 50., 60., 70., 80.],
        y: &[1., 3., 2., 5., 4., 7., 6., 8.],
        rho: 0.9285714285714287,
        p: 0.0008629681828999769,
    },
    SpearmanCase {
        x: &[4., 4., 3., 5., 2., 4., 1., 3.],
        y: &[3., 5., 2., 5., 1., 4., 2., 4.],
        rho: 0.8125634840021283,
        p: 0.014235223830373721,
    },
];

pub struct AnovaCase {
    pub groups: &'static [&'static [f64]],
    pub f: f64,
    pub p: f64,
    /// (i, j, mean_i − mean_j, p)
    pub pairs: &'static [(usize, usize, f64, f64)],
}

pub const ANOVA: [AnovaCase; 5] = [
    AnovaCase {
        groups: &[
            &[6., 8., 4., 5., 3., 4.],
            &[8., 12., 9., 11., 6., 8.],
            &[13., 9., 11., 8., 7., 12.],
        ],
        f: 9.264705882352942,
        p: 0.0023987773293929083,
        pairs: &[
            (0, 1, -4.0, 0.013913287267276475),
            (0, 2, -5.0, 0.0027321219673726027),
            (1, 2, -1.0, 0.7006599385323459),
        ],
    },
    AnovaCase {
        groups: &[&[1., 2., 3.], &[4., 5., 6.], &[7., 8., 9., 10.]],
        f: 28.583333333333332,
        p: 0.00042880512084260376,
        pairs: &[
            (0, 1, -3.0, 0.03356153115290317),
            (0, 2, -6.5, 0.0003455419018865147),
            (1, 2, -3.5, 0.011939384122084729),
        ],
    },
    AnovaCase {
        groups: &[&[2.5, 3.1, 2.9, 3.3], &[3.0, 3.6, 3.2], &[2.1, 2.4, 2.8, 2.2, 2.6]],
        f: 7.621723207401699,
        p: 0.011572219930575629,
        pairs: &[
            (0, 1, -0.3166666666666669, 0.4110825797245531),
            (0, 2, 0.5300000000000002, 0.0729786760812563),
            (1, 2, 0.8466666666666671, 0.011582855613330167),
        ],
    },
    AnovaCase {
        groups: &[
            &[4., 3., 5., 4., 4.],
            &[3., 3., 2., 4., 3.],
            &[5., 4., 5., 5., 4.],
            &[3., 4., 3., 3., 4.],
        ],
        f: 6.124999999999999,
        p: 0.005627166567028184,
        pairs: &[
            (0, 1, 1.0, 0.09804764122367915),
            (0, 2, -0.6, 0.46027864893245984),
            (0, 3, 0.6, 0.4602786489324594),
            (1, 2, -1.6, 0.005122965984476369),
            (1, 3, -0.4, 0.7515677112225462),
            (2, 3, 1.2, 0.038219421669181575),
        ],
    },
    AnovaCase {
        groups: &[&[1., 5.], &[2., 4.], &[3., 3.5]],
        f: 0.01234567901234568,
        p: 0.9877801257324339,
        pairs: &[
            (0, 1, 0.0, 1.0),
            (0, 2, -0.25, 0.9898770376413231),
            (1, 2, -0.25, 0.9898770376413231),
        ],
    },
];

pub const PTUKEY: [(f64, usize, f64, f64); 8] = [
    (3.5, 3, 12.0, 0.9300045147248164),
    (2.0, 4, 20.0, 0.4945596545878861),
    (4.2, 6, 30.0, 0.941245259553195),
    (3.0, 2, 5.0, 0.9126406918726386),
    (5.0, 10, 60.0, 0.9747157802409215),
    (1.0, 3, 1000.0, 0.24065476887251955),
    (3.0, 2, 1.0, 0.7195622019924566),
    (10.0, 3, 2.0, 0.9647564421473899),
];

pub const QTUKEY_95: [(usize, f64, f64); 6] = [
    (3, 12.0, 3.772928965726967),
    (2, 10.0, 3.151064183329372),
    (4, 20.0, 3.9582935609453846),
    (6, 30.0, 4.301463843938219),
    (6, 210.0, 4.067590418538771),
    (3, 1000.0, 3.3194448973252),
];
