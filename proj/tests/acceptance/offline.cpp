#include "harness.hpp"

namespace acceptance {

// The CLI test suite runs in a fresh network namespace (no interfaces up) when one
// can be created, otherwise with proxies pointed at a closed port.
ACCEPTANCE_CRITERION(10, offline_totality, "CLI test suite passes with OOPROMPT_MOCK=1 and no network") {
  TempDir dir;
  std::map<std::string, std::optional<std::string>> env = {
      {"OOPROMPT_MOCK", "1"},          {"OOPROMPT_API_KEY", std::nullopt}, {"OOPROMPT_BASE_URL", std::nullopt},
      {"http_proxy", "http://127.0.0.1:9"}, {"https_proxy", "http://127.0.0.1:9"}};
  // -r maps to root in a user namespace, which can lose search permission on the
  // build tree, so the probe runs the real test binary.
  std::string isolation = "proxies only (no network namespace available)";
  std::string prefix;
  for (const std::string candidate : {"unshare -n", "unshare -rn"}) {
    if (run_process({OOPROMPT_UNIT_TESTS_PATH, "--gtest_list_tests"}, dir.path(), {}, candidate).code == 0) {
      isolation = "network namespace (" + candidate + ")";
      prefix = candidate;
      break;
    }
  }
  ProcessResult r = run_process({OOPROMPT_UNIT_TESTS_PATH, "--gtest_filter=Cli.*:Service.ReadsMatchCliJson",
                                 "--gtest_brief=1"},
                                dir.path(), env, prefix);
  std::size_t passed = 0;
  if (auto at = r.out.find("[  PASSED  ] "); at != std::string::npos) {
    passed = std::stoul(r.out.substr(at + 13));
  }
  std::string detail = std::to_string(passed) + " CLI tests passed under " + isolation;
  if (r.code != 0) detail += "; exit " + std::to_string(r.code) + ": " + r.out.substr(0, 400);
  return {r.code == 0 && passed > 0, detail};
}

}  // namespace acceptance
