//! Figure presets. Each pins the parameters that the figure captions leave
//! open and states them in the output header.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::SweepGrid;
use crate::models::FadingModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetCurve {
    pub label: String,
    /// Mean SNR is replaced by the sweep.
    pub model: FadingModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetDef {
    pub name: &'static str,
    pub pinned: &'static str,
    pub grid: SweepGrid,
    pub curves: Vec<PresetCurve>,
}

const GRID: SweepGrid = SweepGrid {
    start_db: -5.0,
    stop_db: 30.0,
    step_db: 1.0,
};

fn curve(label: String, model: FadingModel) -> PresetCurve {
    PresetCurve { label, model }
}

pub fn preset(p: Preset) -> PresetDef {
    let gbar = 1.0;
    match p {
        Preset::Fig1 => PresetDef {
            name: "fig1",
            pinned: "alpha-kappa-mu, alpha = 2, mu in {1, 2}, kappa in {0, 1, 3}, BPSK",
            grid: GRID,
            curves: [1.0, 2.0]
                .iter()
                .flat_map(|&mu| {
                    [0.0, 1.0, 3.0].map(|kappa| {
                        curve(
                            format!("alpha=2 kappa={kappa} mu={mu}"),
                            FadingModel::AlphaKappaMu { alpha: 2.0, kappa, mu, gbar },
                        )
                    })
                })
                .collect(),
        },
        Preset::Fig2 => PresetDef {
            name: "fig2",
            pinned: "alpha-lambda-eta-mu, alpha = 2, lambda = 0, eta in {0.5, 2}, mu in {0.5, 1, 2}, BPSK",
            grid: GRID,
            curves: [0.5, 2.0]
                .iter()
                .flat_map(|&eta| {
                    [0.5, 1.0, 2.0].map(|mu| {
                        curve(
                            format!("alpha=2 lambda=0 eta={eta} mu={mu}"),
                            FadingModel::AlphaLambdaEtaMu {
                                alpha: 2.0,
                                lambda: 0.0,
                                eta,
                                mu,
                                gbar,
                            },
                        )
                    })
                })
                .collect(),
        },
        Preset::Fig3 => PresetDef {
            name: "fig3",
            pinned: "eta-lambda-mu, eta = 0.5, lambda in {0, 0.5}, mu in {0.5, 1, 2}, BPSK",
            grid: GRID,
            curves: [0.0, 0.5]
                .iter()
                .flat_map(|&lambda| {
                    [0.5, 1.0, 2.0].map(|mu| {
                        curve(
                            format!("eta=0.5 lambda={lambda} mu={mu}"),
                            FadingModel::EtaLambdaMu { eta: 0.5, lambda, mu, gbar },
                        )
                    })
                })
                .collect(),
        },
        Preset::Fig4 => PresetDef {
            name: "fig4",
            pinned: "alpha-mu, alpha in {1.5, 2, 3}, mu in {1, 2}, BPSK",
            grid: GRID,
            curves: [1.5, 2.0, 3.0]
                .iter()
                .flat_map(|&alpha| {
                    [1.0, 2.0].map(|mu| curve(format!("alpha={alpha} mu={mu}"), FadingModel::AlphaMu { alpha, mu, gbar }))
                })
                .collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_admissible() {
        for p in [Preset::Fig1, Preset::Fig2, Preset::Fig3, Preset::Fig4] {
            let d = preset(p);
            assert!(!d.curves.is_empty());
            for c in &d.curves {
                assert!(c.model.validate().is_ok(), "{}", c.label);
            }
        }
    }
}
