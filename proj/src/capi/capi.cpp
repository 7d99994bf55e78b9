// Copyright 2026 The partscreen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "partscreen/partscreen.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "app/verify.hpp"
#include "common/error.hpp"
#include "train/trainer.hpp"

struct ps_config {
  partscreen::app::RunConfig value;
};

struct ps_model {
  std::unique_ptr<partscreen::train::Trainer> trainer;
};

namespace {

using partscreen::Error;
using partscreen::ErrorCode;

thread_local std::string g_last_error;

ps_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return PS_ERR_INVALID_ARGUMENT;
    case ErrorCode::kShape: return PS_ERR_SHAPE;
    case ErrorCode::kConfig: return PS_ERR_CONFIG;
    case ErrorCode::kIo: return PS_ERR_IO;
    case ErrorCode::kNumeric: return PS_ERR_NUMERIC;
    case ErrorCode::kVerification: return PS_ERR_VERIFICATION;
  }
  return PS_ERR_INTERNAL;
}

template <class F>
ps_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return PS_ERR_INTERNAL;
}

void require_arg(bool cond, const char* what) {
  if (!cond) partscreen::fail(ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ps_status new_config(partscreen::app::RunConfig value, ps_config** out) {
  *out = new ps_config{std::move(value)};
  return PS_OK;
}

}  // namespace

extern "C" {

const char* ps_last_error(void) { return g_last_error.c_str(); }

const char* ps_status_name(ps_status status) {
  switch (status) {
    case PS_OK: return "ok";
    case PS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PS_ERR_CONFIG: return "configuration error";
    case PS_ERR_IO: return "i/o error";
    case PS_ERR_SHAPE: return "shape mismatch";
    case PS_ERR_NUMERIC: return "numerical failure";
    case PS_ERR_VERIFICATION: return "verification failed";
    case PS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ps_version(void) { return "0.1.0"; }

void ps_string_free(char* s) { std::free(s); }

ps_status ps_config_default(ps_config** out) {
  return guarded([&] {
    require_arg(out, "null output pointer");
    return new_config({}, out);
  });
}

ps_status ps_config_load(const char* path, ps_config** out) {
  return guarded([&] {
    require_arg(path && out, "null argument");
    return new_config(partscreen::app::load_config(path), out);
  });
}

ps_status ps_config_parse(const char* text, ps_config** out) {
  return guarded([&] {
    require_arg(text && out, "null argument");
    std::istringstream is(text);
    return new_config(partscreen::app::parse_config(is), out);
  });
}

void ps_config_free(ps_config* config) { delete config; }

ps_status ps_config_set(ps_config* config, const char* key, const char* value) {
  return guarded([&] {
    require_arg(config && key && value, "null argument");
    partscreen::app::set_value(config->value, key, value);
    return PS_OK;
  });
}

ps_status ps_config_set_branches(ps_config* config, const char* name) {
  return guarded([&] {
    require_arg(config && name, "null argument");
    partscreen::app::apply_branches(config->value, partscreen::app::parse_branches(name));
    return PS_OK;
  });
}

ps_status ps_config_echo(const ps_config* config, char** out) {
  return guarded([&] {
    require_arg(config && out, "null argument");
    *out = dup_string(partscreen::app::echo(config->value));
    return PS_OK;
  });
}

ps_status ps_config_validate(const ps_config* config) {
  return guarded([&] {
    require_arg(config, "null argument");
    partscreen::app::validate(config->value);
    return PS_OK;
  });
}

ps_status ps_gendata(const ps_config* config, const char* out_dir, char** report_json) {
  return guarded([&] {
    require_arg(config && out_dir && report_json, "null argument");
    *report_json = dup_string(partscreen::app::cmd_gendata(config->value, out_dir).dump(2));
    return PS_OK;
  });
}

ps_status ps_train(const ps_config* config, int resume, ps_log_fn log, void* user,
                   char** report_json) {
  return guarded([&] {
    require_arg(config && report_json, "null argument");
    partscreen::app::TrainOptions options;
    options.resume = resume != 0;
    if (log) options.log = [log, user](const std::string& line) { log(line.c_str(), user); };
    *report_json = dup_string(partscreen::app::cmd_train(config->value, options).dump(2));
    return PS_OK;
  });
}

ps_status ps_eval(const char* checkpoint, const char* data_dir, char** report_json) {
  return guarded([&] {
    require_arg(checkpoint && data_dir && report_json, "null argument");
    *report_json = dup_string(partscreen::app::cmd_eval(checkpoint, data_dir).dump(2));
    return PS_OK;
  });
}

ps_status ps_verify(uint64_t seed, char** report_json) {
  return guarded([&] {
    require_arg(report_json, "null argument");
    partscreen::app::VerifyOptions options;
    options.seed = seed;
    const auto checks = partscreen::app::run_verify(options);
    *report_json = dup_string(partscreen::app::to_json(checks).dump(2));
    if (partscreen::app::all_passed(checks)) return PS_OK;
    g_last_error = "one or more verification checks failed";
    return PS_ERR_VERIFICATION;
  });
}

ps_status ps_model_load(const char* checkpoint, ps_model** out) {
  return guarded([&] {
    require_arg(checkpoint && out, "null argument");
    auto model = std::make_unique<ps_model>();
    model->trainer = partscreen::app::load_trainer(checkpoint);
    *out = model.release();
    return PS_OK;
  });
}

void ps_model_free(ps_model* model) { delete model; }

ps_status ps_model_shape(const ps_model* model, size_t* channels, size_t* tasks) {
  return guarded([&] {
    require_arg(model && channels && tasks, "null argument");
    const auto& mc = model->trainer->network().config();
    *channels = mc.in_channels;
    *tasks = mc.tasks;
    return PS_OK;
  });
}

ps_status ps_model_predict(const ps_model* model, const double* images, size_t n,
                           size_t height, size_t width, double* probs) {
  return guarded([&] {
    require_arg(model && images && probs && n > 0 && height > 0 && width > 0,
                "null or empty argument");
    const auto& mc = model->trainer->network().config();
    const std::size_t count = n * mc.in_channels * height * width;
    const auto x = partscreen::Tensor::from_data({n, mc.in_channels, height, width},
                                                 std::vector<double>(images, images + count));
    const auto p = model->trainer->infer(x);
    std::copy(p.data().begin(), p.data().end(), probs);
    return PS_OK;
  });
}

}  // extern "C"
