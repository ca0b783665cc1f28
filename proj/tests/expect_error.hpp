#pragma once

#include <string>

#include <gtest/gtest.h>

#include "plantres/error.hpp"

// Runs `stmt`, requiring an Error with `expected_code` whose message contains
// `needle`.
#define EXPECT_PLANTRES_ERROR(stmt, expected_code, needle)                                   \
  do {                                                                              \
    try {                                                                           \
      stmt;                                                                         \
      ADD_FAILURE() << "expected " << plantres::error_code_name(expected_code) << " from " #stmt; \
    } catch (const plantres::Error& e) {                                            \
      EXPECT_EQ(e.code(), expected_code) << e.what();                                        \
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos)             \
          << "message: " << e.what();                                               \
    }                                                                               \
  } while (0)
