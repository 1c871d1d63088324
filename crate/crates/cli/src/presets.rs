//! Hyperparameters published for the six benchmark datasets.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub beta: f64,
    pub lambda: f64,
    pub low_freq: usize,
}

pub const PRESETS: [Preset; 6] = [
    Preset { name: "CCV", beta: 0.1, lambda: 1e-5, low_freq: 18 },
    Preset { name: "Caltech102", beta: 1.0, lambda: 10.0, low_freq: 16 },
    Preset { name: "NUS-WIDE-OBJ", beta: 1.0, lambda: 1e-3, low_freq: 16 },
    Preset { name: "AwA", beta: 0.1, lambda: 0.03, low_freq: 9 },
    Preset { name: "Cifar-10", beta: 1e-4, lambda: 1e-4, low_freq: 16 },
    Preset { name: "YoutubeFace_sel", beta: 0.1, lambda: 0.005, low_freq: 19 },
];

/// Case-insensitive lookup.
pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name.eq_ignore_ascii_case(name))
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}
