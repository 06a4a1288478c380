//! Regenerates the four figure presets and prints a compact table per preset.

use fadingmgf::cli::{preset, Preset};
use fadingmgf::errorrates::{aser_sweep, modulation_spec, Scheme};
use fadingmgf::mgf::MgfStrategy;
use fadingmgf::FitCache;

fn main() -> fadingmgf::Result<()> {
    let cache = FitCache::default();
    let spec = modulation_spec(Scheme::Mpsk, 2)?;
    for p in [Preset::Fig1, Preset::Fig2, Preset::Fig3, Preset::Fig4] {
        let def = preset(p);
        let grid: Vec<f64> = def.grid.points()?.into_iter().step_by(5).collect();
        println!("{}: {}", def.name, def.pinned);
        print!("{:<32}", "curve \\ gbar_db");
        for g in &grid {
            print!("{g:>11}");
        }
        println!();
        for c in &def.curves {
            let curve = aser_sweep(&c.model, &grid, &spec, MgfStrategy::Auto, &cache)?;
            print!("{:<32}", c.label);
            for (_, v) in curve.values() {
                print!("{v:>11.3e}");
            }
            println!();
        }
        println!();
    }
    Ok(())
}
