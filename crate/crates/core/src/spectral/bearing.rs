//! Defect frequencies of the SKF test bearing used in the Case Western
//! Reserve University fault data.

/// Localized bearing defect location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Defect {
    InnerRing,
    OuterRing,
    CageTrain,
    RollingElement,
}

impl Defect {
    pub const ALL: [Defect; 4] = [
        Defect::InnerRing,
        Defect::OuterRing,
        Defect::CageTrain,
        Defect::RollingElement,
    ];

    /// Defect frequency as a multiple of the shaft rotation frequency.
    pub fn multiplier(self) -> f64 {
        match self {
            Defect::InnerRing => 5.4152,
            Defect::OuterRing => 3.5848,
            Defect::CageTrain => 0.3983,
            Defect::RollingElement => 4.7135,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Defect::InnerRing => "inner",
            Defect::OuterRing => "outer",
            Defect::CageTrain => "cage",
            Defect::RollingElement => "rolling",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inner" | "inner_ring" | "innerring" => Some(Defect::InnerRing),
            "outer" | "outer_ring" | "outerring" => Some(Defect::OuterRing),
            "cage" | "cage_train" | "cagetrain" => Some(Defect::CageTrain),
            "rolling" | "ball" | "rolling_element" | "rollingelement" => {
                Some(Defect::RollingElement)
            }
            _ => None,
        }
    }
}

/// Nominal bearing dimensions in millimetres. Carried as metadata only.
pub const BEARING_DIMENSIONS_MM: [(&str, f64); 4] = [
    ("inner_diameter", 25.00),
    ("outside_diameter", 52.00),
    ("thickness", 15.00),
    ("pitch_diameter", 8.03),
];

/// Defect frequency in Hz for a shaft speed in revolutions per minute.
pub fn fault_frequency(defect: Defect, rpm: f64) -> f64 {
    assert!(rpm > 0.0, "rpm must be positive");
    defect.multiplier() * rpm / 60.0
}
