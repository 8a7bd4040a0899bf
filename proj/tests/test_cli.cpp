#include <doctest.h>

#include <png.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "oracles.hpp"
#include "wavesim/config.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

Run run(const std::string& args) {
  const std::string command = std::string(WAVESIM_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  while (std::size_t n = std::fread(buffer, 1, sizeof(buffer), pipe)) r.output.append(buffer, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_png(const fs::path& path, int size, std::mt19937_64& g) {
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(size * size * 3));
  for (auto& b : rgb) b = static_cast<std::uint8_t>(g() & 0xff);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = image.height = static_cast<png_uint_32>(size);
  image.format = PNG_FORMAT_RGB;
  REQUIRE(png_image_write_to_file(&image, path.string().c_str(), 0, rgb.data(), 0, nullptr));
}

// Two classes of random 16x16 images; cats/c0 and cats/c0_copy are identical.
fs::path image_fixture(const std::string& name, int size = 16) {
  const fs::path root = fs::temp_directory_path() / ("wavesim_cli_" + name);
  fs::remove_all(root);
  fs::create_directories(root / "cats");
  fs::create_directories(root / "dogs");
  auto g = oracle::rng(91);
  for (int i = 0; i < 5; ++i) write_png(root / "cats" / ("c" + std::to_string(i) + ".png"), size, g);
  for (int i = 0; i < 4; ++i) write_png(root / "dogs" / ("d" + std::to_string(i) + ".png"), size, g);
  fs::copy_file(root / "cats" / "c0.png", root / "cats" / "c0_copy.png");
  return root;
}

std::string dataset_args(const fs::path& root, const fs::path& out, int size = 16) {
  return "--dataset.format image_dir --dataset.path " + root.string() + " --dataset.height " + std::to_string(size) +
         " --dataset.width " + std::to_string(size) + " --output_dir " + out.string();
}

}  // namespace

TEST_CASE("usage errors exit 2 with a message naming the problem") {
  const auto unknown = run("alg1 --wavelet.bassis haar");
  CHECK(unknown.code == 2);
  CHECK(unknown.output.find("wavelet.bassis") != std::string::npos);

  const fs::path cfg = fs::temp_directory_path() / "wavesim_cli_unknown.json";
  std::ofstream(cfg) << R"({"clustering": {"nc": 3}})";
  const auto from_file = run("alg1 -c " + cfg.string());
  CHECK(from_file.code == 2);
  CHECK(from_file.output.find("clustering.nc") != std::string::npos);

  const auto missing = run("alg1 --dataset.format image_dir --dataset.path /nonexistent/wavesim");
  CHECK(missing.code == 2);
  CHECK(missing.output.find("dataset not found") != std::string::npos);

  const auto edge = run("graph --graph.edge_threshold 1.01");
  CHECK(edge.code == 2);
  CHECK(edge.output.find("graph.edge_threshold") != std::string::npos);

  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("--workers 0 stats").code == 2);
}

TEST_CASE("help lists every config key with its default") {
  const auto help = run("alg2 --help");
  CHECK(help.code == 0);
  for (const auto& key : wavesim::config_keys()) CHECK_MESSAGE(help.output.find("--" + key.path) != std::string::npos, key.path);
  const auto top = run("--help");
  CHECK(top.code == 0);
  CHECK(top.output.find("Exit codes") != std::string::npos);
}

TEST_CASE("alg1 writes its outputs and the digest is reproducible") {
  const fs::path root = image_fixture("alg1");
  const fs::path out1 = fs::temp_directory_path() / "wavesim_cli_alg1_out1";
  const fs::path out2 = fs::temp_directory_path() / "wavesim_cli_alg1_out2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  const auto a = run("alg1 " + dataset_args(root, out1) + " --clustering.n_c 9");
  REQUIRE_MESSAGE(a.code == 0, a.output);
  const auto b = run("--workers 3 alg1 " + dataset_args(root, out2) + " --clustering.n_c 9");
  REQUIRE_MESSAGE(b.code == 0, b.output);
  for (const char* file : {"report.json", "kept_ids.csv", "groups.csv"}) CHECK(fs::exists(out1 / file));
  const auto r1 = nlohmann::json::parse(slurp(out1 / "report.json"));
  const auto r2 = nlohmann::json::parse(slurp(out2 / "report.json"));
  CHECK(r1["digest"] == r2["digest"]);
  CHECK(r1["procedure"] == "algorithm1");
  CHECK(r1["dataset"]["images"] == 10);
  CHECK(r1["config"]["clustering"]["n_c"] == 9);
  CHECK(slurp(out1 / "groups.csv") == slurp(out2 / "groups.csv"));
  // the bitwise copy must share a group with its original
  const std::string groups = slurp(out1 / "groups.csv");
  CHECK(groups.rfind("group_id,member_id,label,role,representative_flag\n", 0) == 0);
  CHECK(groups.find("cats/c0_copy.png") != std::string::npos);
  CHECK(slurp(out1 / "kept_ids.csv").rfind("source_id\n", 0) == 0);
}

TEST_CASE("alg2, dedupe, graph and stats produce their files") {
  const fs::path root = image_fixture("alg2");
  const fs::path out = fs::temp_directory_path() / "wavesim_cli_alg2_out";
  fs::remove_all(out);
  const std::string args = dataset_args(root, out) + " --similarity.ssim.window_size 7";
  const auto a2 = run("alg2 " + args);
  REQUIRE_MESSAGE(a2.code == 0, a2.output);
  for (const char* file : {"report.json", "similarity.bin", "similarity.bin.json", "similarity.csv", "spectrum.csv", "n_c.txt"}) {
    CHECK_MESSAGE(fs::exists(out / file), file);
  }
  CHECK(fs::file_size(out / "similarity.bin") == 10 * 10 * 8);

  const auto dd = run("dedupe " + args + " --thresholds.dedupe 0.99");
  REQUIRE_MESSAGE(dd.code == 0, dd.output);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report["procedure"] == "dedupe");
  CHECK(report["kept_ids"].size() == 9);

  const auto gr = run("graph " + args + " --graph.edge_threshold 0.9");
  REQUIRE_MESSAGE(gr.code == 0, gr.output);
  const std::string dot = slurp(out / "graph.dot");
  CHECK(dot.rfind("graph G {", 0) == 0);
  CHECK(dot.find("--") != std::string::npos);  // the duplicate pair
  CHECK(fs::exists(out / "isolation.csv"));

  const auto st = run("stats " + args);
  REQUIRE_MESSAGE(st.code == 0, st.output);
  const auto stats = nlohmann::json::parse(slurp(out / "coeff_stats.json"));
  CHECK(stats["rows"] == 10);
}

TEST_CASE("cross-set comparison of mismatched shapes is a data error") {
  const fs::path small = image_fixture("cross_small", 16);
  const fs::path big = image_fixture("cross_big", 16);
  const fs::path out = fs::temp_directory_path() / "wavesim_cli_cross_out";
  fs::remove_all(out);
  const auto ok = run("cross " + dataset_args(small, out) + " --dataset.test_path " + big.string() +
                      " --similarity.ssim.window_size 7");
  REQUIRE_MESSAGE(ok.code == 0, ok.output);
  CHECK(fs::exists(out / "cross_report.json"));

  // MNIST-shaped training set against colour images
  const fs::path mnist = fs::temp_directory_path() / "wavesim_cli_cross_mnist";
  fs::remove_all(mnist);
  fs::create_directories(mnist);
  const auto put_be32 = [](std::ofstream& f, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) f.put(static_cast<char>((v >> s) & 0xff));
  };
  {
    std::ofstream images(mnist / "train-images-idx3-ubyte", std::ios::binary);
    put_be32(images, 0x803);
    put_be32(images, 2);
    put_be32(images, 28);
    put_be32(images, 28);
    for (int k = 0; k < 2 * 784; ++k) images.put(static_cast<char>(k & 0x7f));
    std::ofstream labels(mnist / "train-labels-idx1-ubyte", std::ios::binary);
    put_be32(labels, 0x801);
    put_be32(labels, 2);
    labels.put(1);
    labels.put(2);
  }
  const fs::path cfg = fs::temp_directory_path() / "wavesim_cli_cross.json";
  std::ofstream(cfg) << nlohmann::json{{"dataset", {{"format", "mnist"}, {"path", mnist.string()}, {"test_path", small.string()}, {"test_format", "image_dir"}}}}.dump();
  const auto bad = run("cross -c " + cfg.string() + " --output_dir " + out.string());
  CHECK(bad.code == 3);
}
