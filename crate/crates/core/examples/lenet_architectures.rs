//! Build the stock topologies, print their dimension chains and parameter
//! counts, and show how a bad input side is reported.
//!
//! cargo run --example lenet_architectures

use spectral_cnn::arch::{build_arch, build_network, validate_chain, ArchName, BodyOptions, TableKind};
use spectral_cnn::nn::PoolingKind;

fn main() -> spectral_cnn::Result<()> {
    let variants = [
        ("lenet5 60 subs", ArchName::Lenet5, 60, BodyOptions::default()),
        ("lenet5 28 subs", ArchName::Lenet5, 28, BodyOptions::default()),
        ("lenet5 60 l2pool", ArchName::Lenet5, 60, BodyOptions { pooling: PoolingKind::L2Pool, ..Default::default() }),
        ("lenet5 60 sparse c3", ArchName::Lenet5, 60, BodyOptions { c3_table: TableKind::Lenet5, ..Default::default() }),
        ("lenet7 60 subs", ArchName::Lenet7, 60, BodyOptions::default()),
    ];
    for (label, arch, side, body) in variants {
        let cfg = build_arch(arch, side, &body)?;
        let sides = validate_chain(&cfg).expect("stock topologies are consistent");
        let net = build_network(&cfg, 1)?;
        let layers: Vec<_> = net.layers.iter().map(|l| l.name()).collect();
        println!("{label:<20} {:>7} params  sides {sides:?}", net.param_count());
        println!("{:<20} {}", "", layers.join(" "));
    }

    let mut bad = build_arch(ArchName::Lenet5, 60, &BodyOptions::default())?;
    bad.input_side = 59;
    match validate_chain(&bad) {
        Ok(_) => println!("59x59 unexpectedly fits"),
        Err(d) => println!("59x59 input: {d}"),
    }
    Ok(())
}
