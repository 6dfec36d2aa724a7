#include "bcm/bcm.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "bcm/error.hpp"
#include "bcm/io.hpp"
#include "bcm/pipeline.hpp"

struct bcm_toeplitz {
  bcm::BlockToeplitz g;
};

struct bcm_config {
  bcm::ExperimentConfig cfg;
};

namespace {

thread_local std::string last_error;

bcm_status fail(bcm_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs fn and translates exceptions into status codes.
template <class Fn>
bcm_status guard(Fn&& fn) {
  try {
    return fn();
  } catch (const bcm::Error& e) {
    return fail(static_cast<bcm_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(BCM_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BCM_INTERNAL, e.what());
  } catch (...) {
    return fail(BCM_INTERNAL, "unknown failure");
  }
}

bcm_status null_arg(const char* what) { return fail(BCM_INVALID_ARGUMENT, std::string(what) + " is null"); }

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void hand_out(char** dst, const std::string& s) {
  if (dst) *dst = copy_string(s);
}

void copy_rows(const bcm::Matrix& m, double* out) {
  for (bcm::Index i = 0; i < m.rows(); ++i) {
    for (bcm::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
  }
}

bcm::RowVector read_row(const double* b, bcm::Index n) {
  bcm::RowVector r(n);
  for (bcm::Index k = 0; k < n; ++k) r(k) = b[k];
  return r;
}

}  // namespace

extern "C" {

const char* bcm_last_error(void) { return last_error.c_str(); }

const char* bcm_status_name(bcm_status status) {
  if (status == BCM_CHECK_FAILED) return "CheckFailed";
  return bcm::errc_name(static_cast<bcm::Errc>(status));
}

void bcm_string_free(char* s) { std::free(s); }

bcm_status bcm_toeplitz_create(size_t m, size_t n, const double* blocks, bcm_toeplitz** out) {
  if (!blocks) return null_arg("blocks");
  if (!out) return null_arg("out");
  return guard([&] {
    if (m == 0 || n == 0) throw bcm::Error(bcm::Errc::invalid_argument, "m and n must be positive");
    std::vector<bcm::Matrix> list;
    for (size_t k = 0; k < n; ++k) {
      bcm::Matrix b(static_cast<bcm::Index>(m), static_cast<bcm::Index>(m));
      for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < m; ++j) {
          b(static_cast<bcm::Index>(i), static_cast<bcm::Index>(j)) = blocks[k * m * m + i * m + j];
        }
      }
      list.push_back(std::move(b));
    }
    *out = new bcm_toeplitz{bcm::BlockToeplitz(std::move(list))};
    return BCM_OK;
  });
}

bcm_status bcm_toeplitz_random_spd(size_t m, size_t n, uint64_t seed, bcm_toeplitz** out) {
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new bcm_toeplitz{
        bcm::random_spd_block_toeplitz(static_cast<bcm::Index>(m), static_cast<bcm::Index>(n), seed)};
    return BCM_OK;
  });
}

bcm_status bcm_toeplitz_load(const char* path, bcm_toeplitz** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new bcm_toeplitz{bcm::io::load_toeplitz(path)};
    return BCM_OK;
  });
}

bcm_status bcm_toeplitz_save(const bcm_toeplitz* g, const char* path) {
  if (!g) return null_arg("matrix");
  if (!path) return null_arg("path");
  return guard([&] {
    bcm::io::save_toeplitz(path, g->g);
    return BCM_OK;
  });
}

void bcm_toeplitz_destroy(bcm_toeplitz* g) { delete g; }

bcm_status bcm_toeplitz_dims(const bcm_toeplitz* g, size_t* m, size_t* n) {
  if (!g) return null_arg("matrix");
  if (m) *m = static_cast<size_t>(g->g.block_size());
  if (n) *n = static_cast<size_t>(g->g.block_count());
  return BCM_OK;
}

bcm_status bcm_toeplitz_validate(const bcm_toeplitz* g, double tol, double* min_pivot) {
  if (!g) return null_arg("matrix");
  return guard([&] {
    const auto d = bcm::validate_spd(g->g, tol);
    if (min_pivot) *min_pivot = d.min_pivot;
    return BCM_OK;
  });
}

bcm_status bcm_toeplitz_levinson(const bcm_toeplitz* g, double* y) {
  if (!g) return null_arg("matrix");
  if (!y) return null_arg("y");
  return guard([&] {
    copy_rows(bcm::levinson_y(g->g).stacked(), y);
    return BCM_OK;
  });
}

bcm_status bcm_toeplitz_inverse(const bcm_toeplitz* g, double* out) {
  if (!g) return null_arg("matrix");
  if (!out) return null_arg("out");
  return guard([&] {
    copy_rows(bcm::invert_from_y(bcm::levinson_y(g->g)), out);
    return BCM_OK;
  });
}

bcm_status bcm_toeplitz_solve_row(const bcm_toeplitz* g, const double* b, double* c) {
  if (!g) return null_arg("matrix");
  if (!b || !c) return null_arg("vector");
  return guard([&] {
    copy_rows(bcm::solve_row(g->g, read_row(b, g->g.dim())), c);
    return BCM_OK;
  });
}

bcm_status bcm_toeplitz_solve_row_dense(const bcm_toeplitz* g, const double* b, double* c) {
  if (!g) return null_arg("matrix");
  if (!b || !c) return null_arg("vector");
  return guard([&] {
    const bcm::Matrix a = bcm::expand_dense(g->g).transpose();
    copy_rows(bcm::dense_oracle_solve(a, read_row(b, g->g.dim()).transpose()).transpose(), c);
    return BCM_OK;
  });
}

bcm_status bcm_config_default(bcm_config** out) {
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new bcm_config{};
    return BCM_OK;
  });
}

bcm_status bcm_config_load(const char* path, bcm_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new bcm_config{bcm::load_config(path)};
    return BCM_OK;
  });
}

bcm_status bcm_config_set(bcm_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("config");
  if (!key || !value) return null_arg("key/value");
  return guard([&] {
    bcm::set_config_value(cfg->cfg, key, value);
    return BCM_OK;
  });
}

void bcm_config_destroy(bcm_config* cfg) { delete cfg; }

bcm_status bcm_config_describe(const bcm_config* cfg, char** json) {
  if (!cfg) return null_arg("config");
  if (!json) return null_arg("json");
  return guard([&] {
    *json = copy_string(bcm::to_json(cfg->cfg));
    return BCM_OK;
  });
}

bcm_status bcm_run_forward(const bcm_config* cfg, char** summary) {
  if (!cfg) return null_arg("config");
  return guard([&] {
    hand_out(summary, bcm::to_json(bcm::run_forward(cfg->cfg)));
    return BCM_OK;
  });
}

bcm_status bcm_run_gram(const bcm_config* cfg, char** summary) {
  if (!cfg) return null_arg("config");
  return guard([&] {
    hand_out(summary, bcm::to_json(bcm::run_gram(cfg->cfg), cfg->cfg));
    return BCM_OK;
  });
}

bcm_status bcm_run_solve(const bcm_config* cfg, char** summary) {
  if (!cfg) return null_arg("config");
  return guard([&] {
    hand_out(summary, bcm::to_json(bcm::run_solve(cfg->cfg)));
    return BCM_OK;
  });
}

bcm_status bcm_run_verify(const bcm_config* cfg, char** summary) {
  if (!cfg) return null_arg("config");
  return guard([&] {
    const auto checks = bcm::run_verify(cfg->cfg);
    const std::string text = bcm::to_json(checks);
    bcm::write_report(cfg->cfg, "verify.json", text + "\n");
    hand_out(summary, text);
    for (const auto& c : checks) {
      if (!c.passed) return fail(BCM_CHECK_FAILED, "check '" + c.name + "' failed");
    }
    return BCM_OK;
  });
}

bcm_status bcm_run_bench(const bcm_config* cfg, char** summary) {
  if (!cfg) return null_arg("config");
  return guard([&] {
    hand_out(summary, bcm::to_json(bcm::run_bench(cfg->cfg)));
    return BCM_OK;
  });
}

bcm_status bcm_run_all(const bcm_config* cfg, char** summary) {
  if (!cfg) return null_arg("config");
  return guard([&] {
    using json = nlohmann::ordered_json;
    const auto& c = cfg->cfg;
    json out;
    out["forward"] = json::parse(bcm::to_json(bcm::run_forward(c)));
    out["bcp"] = json::parse(bcm::to_json(bcm::run_bcp(c)));
    if (!c.shortened_T.empty()) {
      std::string csv = "T,residual_levinson,flattening_rms,flattening_mean\n";
      for (const auto& r : bcm::run_shortened(c, c.shortened_T)) {
        csv += bcm::io::format_double(r.T) + ',' + bcm::io::format_double(r.residual_levinson) + ',' +
               bcm::io::format_double(r.flattening.rms) + ',' + bcm::io::format_double(r.flattening.mean) + '\n';
      }
      bcm::write_report(c, "shortened.csv", csv);
    }
    const auto checks = bcm::run_verify(c);
    bcm::write_report(c, "verify.json", bcm::to_json(checks) + "\n");
    out["verify"] = json::parse(bcm::to_json(checks));
    out["bench"] = json::parse(bcm::to_json(bcm::run_bench(c)));
    hand_out(summary, out.dump(2));
    for (const auto& ch : checks) {
      if (!ch.passed) return fail(BCM_CHECK_FAILED, "check '" + ch.name + "' failed");
    }
    return BCM_OK;
  });
}

}  // extern "C"
