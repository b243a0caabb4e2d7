//! Draw redshift-balanced train/valid/test lists from a skewed pool and
//! compare both redshift distributions to a uniform one.
//!
//! cargo run --example stratified_sampling

use std::collections::BTreeMap;

use rand::Rng;
use spectral_cnn::catalog::{CatalogRecord, ObjectClass, ObjectId};
use spectral_cnn::sampler::{
    build_splits, interval_counts, uniform_cdf, EmpiricalCdf, SetEntry, Split, SplitTargets, StratifiedPlan,
};
use spectral_cnn::seed;

fn main() -> spectral_cnn::Result<()> {
    let mut rng = seed::rng(11, &[]);
    let mut pools = BTreeMap::new();
    for class in ObjectClass::ALL {
        // Most objects sit at low redshift, like a flux-limited survey.
        let records: Vec<CatalogRecord> = (0..6000u32)
            .map(|k| {
                let u: f64 = rng.random();
                CatalogRecord {
                    id: ObjectId::new(5000 + class.index() as u32, 56000 + k / 1000, k % 1000 + 1),
                    specboss: 1,
                    zwarning: 0,
                    class,
                    z: 1.5 * u * u,
                }
            })
            .collect();
        pools.insert(class, records);
    }

    let targets = SplitTargets::uniform(600, 60, 120);
    let splits = build_splits(&pools, &targets, 20, 7)?;
    for s in &splits.shortfalls {
        println!("shortfall: {} {} got {} of {}", s.split, s.class, s.selected, s.target);
    }

    let galaxies = &pools[&ObjectClass::Galaxy];
    let plan = StratifiedPlan::covering(galaxies, 20, 1, 7)?;
    let uniform = uniform_cdf(plan.z_min, plan.z_max);
    let pool_z: Vec<f64> = galaxies.iter().map(|r| r.z).collect();
    println!("pool KS to uniform: {:.4}", EmpiricalCdf::new(&pool_z)?.ks_distance_to(&uniform));

    for split in Split::ALL {
        let picked: Vec<CatalogRecord> =
            splits.get(split).iter().filter(|r| r.class == ObjectClass::Galaxy).copied().collect();
        let z: Vec<f64> = picked.iter().map(|r| r.z).collect();
        let ks = EmpiricalCdf::new(&z)?.ks_distance_to(&uniform);
        println!("{split:<5} galaxies {:>4}  KS {ks:.4}  per interval {:?}", picked.len(), interval_counts(&picked, &plan));
    }

    let entries: Vec<SetEntry> = splits.get(Split::Valid).iter().take(3).map(SetEntry::from).collect();
    print!("\n{}", spectral_cnn::sampler::format_set_list(&entries));
    Ok(())
}
