// Writes the benchmark corpus, or checks an existing one against it.
//   fifth-corpus write DIR
//   fifth-corpus check DIR

#include "corpus_gen.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc != 3 || (std::string(argv[1]) != "write" && std::string(argv[1]) != "check")) {
        std::cerr << "usage: fifth-corpus write|check DIR\n";
        return 1;
    }
    bool writing = std::string(argv[1]) == "write";
    fs::path root(argv[2]);
    int stale = 0;
    for (const auto& e : corpus::build()) {
        std::pair<fs::path, std::string> files[] = {
            {root / (e.path + ".5th"), e.program},
            {root / (e.path + ".expected.json"), corpus::render_expected(e.expected)},
        };
        for (const auto& [path, text] : files) {
            if (writing) {
                fs::create_directories(path.parent_path());
                std::ofstream(path, std::ios::binary | std::ios::trunc) << text;
            } else if (slurp(path) != text) {
                std::cerr << "stale: " << path.string() << "\n";
                ++stale;
            }
        }
    }
    if (stale) std::cerr << stale << " corpus files differ from the generator; rerun `fifth-corpus write`\n";
    return stale ? 1 : 0;
}
