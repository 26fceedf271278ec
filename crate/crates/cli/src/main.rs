fn main() {
    println!("zetafield");
}
