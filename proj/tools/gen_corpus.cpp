// Writes the bundled synthetic review corpus. The output is a pure function
// of the configuration, so regenerating with the same arguments recreates
// the file byte for byte.

#include <cstdlib>
#include <iostream>
#include <string>

#include "sentibench/synthetic.hpp"

int main(int argc, char** argv) {
  sentibench::SyntheticConfig config;
  std::string out_path = "data/synthetic_reviews.csv";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto next = [&](const char* name) -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "gen_corpus: " << name << " needs a value\n";
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--out") {
      out_path = next("--out");
    } else if (arg == "--n-docs") {
      config.n_docs = std::stoul(next("--n-docs"));
    } else if (arg == "--seed") {
      config.seed = std::stoull(next("--seed"));
    } else if (arg == "--noise") {
      config.noise_fraction = std::stod(next("--noise"));
    } else {
      std::cerr << "usage: gen_corpus [--out PATH] [--n-docs N] [--seed S] [--noise P]\n";
      return arg == "--help" || arg == "-h" ? 0 : 2;
    }
  }
  try {
    const auto reviews = sentibench::generate_synthetic_reviews(config);
    sentibench::save_reviews_csv(out_path, reviews);
    std::cout << "wrote " << reviews.size() << " reviews -> " << out_path << "\n";
  } catch (const std::exception& e) {
    std::cerr << "gen_corpus: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
