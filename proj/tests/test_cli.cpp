#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "test_support.hpp"

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(BLOOMEMB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void put(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, BuildHashIsDeterministic) {
  const auto a = testing_support::temp_path("cli_a.hash");
  const auto b = testing_support::temp_path("cli_b.hash");
  ASSERT_EQ(run("build-hash --d 50 --m 20 --k 3 --seed 8 --out " + q(a)), 0);
  ASSERT_EQ(run("build-hash --d 50 --m 20 --k 3 --seed 8 --out " + q(b)), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  ASSERT_EQ(run("build-hash --d 50 --m 20 --k 3 --seed 8 --binary --out " + q(b)), 0);
  EXPECT_EQ(slurp(b).substr(0, 4), "BEHM");
}

TEST(Cli, EncodeThenDecodeScoresInputsOne) {
  const auto hash = testing_support::temp_path("cli_codec.hash");
  const auto items = testing_support::temp_path("cli_items.txt");
  const auto bits = testing_support::temp_path("cli_bits.txt");
  const auto scores = testing_support::temp_path("cli_scores.txt");
  ASSERT_EQ(run("build-hash --d 40 --m 40 --k 2 --seed 1 --out " + q(hash)), 0);
  put(items, "3 17 40\n");
  ASSERT_EQ(run("encode --hash " + q(hash) + " --in " + q(items) + " --out " + q(bits)), 0);
  ASSERT_EQ(run("decode --hash " + q(hash) + " --in " + q(bits) + " --top-n 40 --out " + q(scores)), 0);
  // Collisions may add false positives, never false negatives.
  std::istringstream lines(slurp(scores));
  std::set<int> ones;
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line) && !line.empty()) {
    const auto tab = line.find('\t');
    if (std::stod(line.substr(tab + 1)) == 1.0) ones.insert(std::stoi(line.substr(0, tab)));
    ++n;
  }
  EXPECT_EQ(n, 40u);
  for (int item : {3, 17, 40}) EXPECT_TRUE(ones.count(item)) << item;
}

TEST(Cli, EvaluateScoreDump) {
  const auto scores = testing_support::temp_path("cli_eval_scores.txt");
  const auto truth = testing_support::temp_path("cli_eval_truth.txt");
  const auto out = testing_support::temp_path("cli_eval_out.txt");
  put(scores, "2\t0.9\n1\t0.5\n3\t0.1\n\n3\t0.8\n1\t0.2\n");
  put(truth, "1 3\n1\n");
  const std::string cmd = std::string(BLOOMEMB_CLI) + " evaluate --scores " + q(scores) + " --truth " + q(truth) +
                          " > " + q(out);
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  // AP of [2,1,3] against {1,3} is (1/2 + 2/3) / 2; AP of [3,1] against {1} is 1/2.
  const double expected = ((0.5 + 2.0 / 3.0) / 2.0 + 0.5) / 2.0;
  const auto text = slurp(out);
  const auto tab = text.find('\t');
  ASSERT_NE(tab, std::string::npos);
  EXPECT_NEAR(std::stod(text.substr(tab + 1)), expected, 1e-9);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("build-hash --d 50 --k 3 --out /dev/null"), 2);
  EXPECT_EQ(run("build-hash --d 5 --m 2 --k 3 --out /dev/null"), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("encode --hash /nonexistent/h.txt --in /nonexistent/x --out /dev/null"), 1);
  EXPECT_EQ(run("build-hash --d 50 --m 20 --k 3 --out /nonexistent/dir/h.txt"), 1);
  EXPECT_EQ(run("--help"), 0);
}
