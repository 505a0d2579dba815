fn main() {
    let corpus = confrag::fixtures::corpus();
    let sdf = confrag::molgraph::write_sdf(&corpus).unwrap();
    std::fs::write("/tmp/corpus.sdf", &sdf).unwrap();
    let pocket = confrag::fixtures::shell_pocket(9.0, 160);
    std::fs::write("/tmp/pocket.pdb", confrag::fixtures::pocket_to_pdb(&pocket)).unwrap();
    println!("wrote corpus ({} molecules) and pocket", corpus.len());
}
