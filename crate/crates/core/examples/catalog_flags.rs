//! Parse a catalog excerpt, decode ZWARNING masks and keep the usable rows.
//!
//! cargo run --example catalog_flags

use spectral_cnn::catalog::{decode_zwarning, filter_good, parse_catalog, serialize_catalog};

const EXCERPT: &str = "\
#PLATE MJD FIBERID SPECBOSS ZWARNING CLASS Z
3586 55181 45 1 0 1 1.2031
3586 55181 94 1 0 0 0.4517
3587 55182 733 1 4 2 0.0001
3587 55182 739 0 0 0 0.6120
3588 55184 70 1 160 1 2.9402
";

fn main() -> spectral_cnn::Result<()> {
    let records = parse_catalog(EXCERPT)?;
    for r in &records {
        let flags = decode_zwarning(r.zwarning)?;
        let names: Vec<_> = flags.iter().map(|f| f.name()).collect();
        println!("{}  {:<6} z={:<7} specboss={} flags={:?}", r.id, r.class, r.z, r.specboss, names);
    }
    let good = filter_good(&records);
    println!("\n{} of {} records are usable:", good.len(), records.len());
    print!("{}", serialize_catalog(&good));
    Ok(())
}
