//! Published discovered weights, transcribed in storage order.
//!
//! Energy rows: `w1_1, w1_3, w1_2, w1_4, w3_1, w2_1, w2_5, w2_3, w2_7, w2_2,
//! w2_6, w2_4, w2_8, w3_2` (the equilibrium spring has no `w3_*`).
//! Potential rows: `w1_1, w1_3, w̃1_5, w2_1, w2_4, w̃2_7, w2_2, w2_5, w2_8`.

use alloc::vec::Vec;

use crate::energy::{EnergyVariant, EnergyWeights};
use crate::model::{MaxwellBranch, ViscoSolid};
use crate::potential::{PotentialVariant, PotentialWeights};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Single Maxwell element trained on the artificial data.
    Artificial,
    /// VHB 4910 polymer, three branches and an equilibrium spring.
    Vhb4910,
    /// Passive skeletal muscle, trained on one test.
    MuscleTrainOne,
    /// Passive skeletal muscle, trained on four tests.
    MuscleTrainFour,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Artificial,
        Preset::Vhb4910,
        Preset::MuscleTrainOne,
        Preset::MuscleTrainFour,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Artificial => "artificial",
            Preset::Vhb4910 => "vhb4910",
            Preset::MuscleTrainOne => "muscle_train_one",
            Preset::MuscleTrainFour => "muscle_train_four",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn solid(self) -> ViscoSolid {
        match self {
            Preset::Artificial => build(&[ARTIFICIAL_PSI], &[ARTIFICIAL_G], None),
            Preset::Vhb4910 => build(&VHB_PSI_NEQ, &VHB_G, Some(VHB_PSI_EQ)),
            Preset::MuscleTrainOne => build(&MUSCLE1_PSI_NEQ, &MUSCLE1_G, Some(MUSCLE1_PSI_EQ)),
            Preset::MuscleTrainFour => build(&MUSCLE4_PSI_NEQ, &MUSCLE4_G, Some(MUSCLE4_PSI_EQ)),
        }
    }
}

fn build(psi: &[[f64; 14]], g: &[[f64; 9]], eq: Option<[f64; 12]>) -> ViscoSolid {
    let branches: Vec<MaxwellBranch> = psi
        .iter()
        .zip(g)
        .map(|(p, g)| MaxwellBranch {
            energy: EnergyWeights::from_slice(EnergyVariant::Full, p).expect("14 energy weights"),
            potential: PotentialWeights::from_slice(PotentialVariant::Reduced, g).expect("9 potential weights"),
        })
        .collect();
    ViscoSolid {
        branches,
        equilibrium: eq.map(|w| EnergyWeights::from_slice(EnergyVariant::Equilibrium, &w).expect("12 weights")),
    }
}

const ARTIFICIAL_PSI: [f64; 14] = [
    0.16197191,
    0.0,
    0.0,
    0.0,
    4.4753417e-33,
    4.5402040e+00,
    9.2217451e-01,
    0.0,
    0.0,
    2.2400634e+00,
    0.0,
    1.5364066e-33,
    1.8214491e-33,
    0.0,
];
const ARTIFICIAL_G: [f64; 9] = [0.0, 0.0, 0.0, 0.0, 0.0, 0.00107837, 0.0, 0.0, 0.0];

const VHB_PSI_EQ: [f64; 12] = [
    0.08989155, 0.3871473, 0.0, 0.01116255, 2.646479, 3.1516218, 0.0, 0.6164215, 1.4593441, 2.9215317, 0.0537339,
    0.24964914,
];
const VHB_PSI_NEQ: [[f64; 14]; 3] = [
    [
        0.6867937,
        0.6118265,
        0.06561667,
        0.21422595,
        3.9390977e-33,
        1.0183624,
        0.70885456,
        0.35119042,
        0.35955966,
        1.894548,
        1.354211,
        0.1450241,
        0.32216933,
        0.0,
    ],
    [
        0.06954185,
        0.28366846,
        0.0,
        0.01034374,
        -2.5810559e-33,
        2.3602471,
        2.8352766,
        0.0,
        0.1741371,
        1.1949594,
        2.65872,
        0.08411078,
        0.2144338,
        0.0,
    ],
    [
        2.9327118,
        2.6145873,
        0.03622768,
        0.17840806,
        -1.908444e-33,
        1.0819899,
        1.2915097,
        0.21051936,
        0.2551231,
        3.15422,
        2.8406792,
        0.09968195,
        0.23061126,
        0.0,
    ],
];
const VHB_G: [[f64; 9]; 3] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.02321647, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.00174507, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.08019841, 0.0, 0.0, 0.0],
];

const MUSCLE1_PSI_EQ: [f64; 12] = [
    0.10420806, 0.1841228, 0.02560516, 0.21253704, 0.06608981, 0.0637252, 0.06350973, 0.07190274, 0.09108008,
    0.14969026, 0.02551797, 0.20174257,
];
const MUSCLE1_PSI_NEQ: [[f64; 14]; 3] = [
    [
        0.01166395,
        0.01309146,
        0.00111786,
        0.0157883,
        5.497631e-34,
        0.04277665,
        0.03449954,
        0.01193809,
        0.01611285,
        0.01163169,
        0.01267746,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.00115344,
        0.00347792,
        0.00250525,
        0.6823113,
        -2.4178903e-14,
        0.0,
        0.0,
        0.02947876,
        0.06952783,
        0.0,
        0.0,
        0.0014553,
        0.52773875,
        0.0,
    ],
    [
        0.01122695,
        0.01664283,
        0.00101571,
        0.01311576,
        -1.6557697e-05,
        4.2320956e-02,
        3.4831800e-02,
        1.5011105e-02,
        1.8784763e-02,
        1.1191454e-02,
        1.6345050e-02,
        7.9535537e-05,
        0.0,
        0.0,
    ],
];
const MUSCLE1_G: [[f64; 9]; 3] = [
    [
        0.0,
        0.0,
        0.0,
        4.5470802e-06,
        7.6929213e-13,
        1.7541333e-01,
        0.0,
        0.0,
        0.0,
    ],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.5692788, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.15919787, 0.0, 0.0, 0.0],
];

const MUSCLE4_PSI_EQ: [f64; 12] = [
    0.00138299, 0.03045796, 0.07063455, 0.09885824, 0.02312493, 0.04258661, 0.11215075, 0.12233058, 0.00133567,
    0.02934347, 0.0702935, 0.0983757,
];
const MUSCLE4_PSI_NEQ: [[f64; 14]; 3] = [
    [
        0.0,
        0.0,
        0.0,
        7.708453e-10,
        3.6285916e-33,
        3.51029038e-02,
        1.12825185e-02,
        2.31756195e-01,
        5.45360267e-01,
        0.0,
        0.0,
        0.0,
        7.71025022e-10,
        0.0,
    ],
    [
        0.0,
        0.0,
        0.0,
        0.00558791,
        3.733226e-33,
        0.02298807,
        0.01470857,
        0.02367271,
        0.04010505,
        0.0,
        0.0,
        0.0,
        0.00552198,
        0.0,
    ],
    [
        6.044407e-06,
        0.0,
        0.0,
        0.0,
        3.766066e-33,
        8.7625727e-02,
        5.3523790e-02,
        8.5964095e-04,
        8.0012449e-04,
        5.9973318e-06,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
];
const MUSCLE4_G: [[f64; 9]; 3] = [
    [0.0, 0.0, 0.0, 0.0, 4.6914302e-11, 7.3394459e-01, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.24998124, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.29360896, 0.0, 0.0, 0.0],
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Topology;

    #[test]
    fn presets_have_expected_topologies() {
        assert_eq!(Preset::Artificial.solid().topology(), Topology::MAXWELL);
        for p in [Preset::Vhb4910, Preset::MuscleTrainOne, Preset::MuscleTrainFour] {
            assert_eq!(p.solid().topology(), Topology::GENERALIZED);
        }
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()), Some(p));
            assert!(p.solid().is_admissible());
        }
    }

    #[test]
    fn artificial_rows_land_on_named_weights() {
        let m = Preset::Artificial.solid();
        let e = &m.branches[0].energy;
        assert_eq!(e.shape[0], 0.16197191);
        assert_eq!(e.scale[0], 4.5402040);
        assert_eq!(e.scale[1], 2.2400634);
        assert_eq!(e.scale[4], 0.92217451);
        assert_eq!(m.branches[0].potential.scale[2], 0.00107837);
    }
}
