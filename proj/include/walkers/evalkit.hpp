#pragma once

#include <string>
#include <vector>

#include "walkers/types.hpp"

namespace walkers {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double iou = 0.0;
};

/// Pixel overlap scores. Conventions for the degenerate cases: both masks
/// empty -> (1,1,1); pred empty, gt non-empty -> P = 0; gt empty, pred
/// non-empty -> R = 0. Throws InvalidInputError on dimension mismatch.
Metrics metrics(const BinaryMask& pred, const BinaryMask& gt);

/// True iff the contour seals a non-empty region against a flood fill from
/// the border.
bool closed_shape(const BinaryMask& contour);

enum class EvalPolicy { zero_fill, exclude };

struct EvalPair {
  std::string id;
  std::string pred_path;  // empty = open shape (no prediction produced)
  std::string gt_path;
  double seconds = 0.0;
};

struct EvalRecord {
  std::string id;
  bool closed = false;
  Metrics scores;  // zeros when not closed
  double seconds = 0.0;
};

struct EvalError {
  std::string id;
  std::string message;
};

struct Report {
  std::vector<EvalRecord> records;
  std::vector<EvalError> errors;  // excluded from the aggregates
  Metrics mean_all;               // per policy: open shapes as zeros, or dropped
  Metrics mean_closed;            // closed subset only
  int closed_count = 0;
  int evaluated_count = 0;        // records entering mean_all
};

/// Score each (pred, gt) mask pair from disk. A record counts as closed when
/// its pred path is set and the loaded mask is non-empty. Unreadable pairs
/// become record-level errors. Throws InvalidInputError on an empty list.
Report batch_eval(const std::vector<EvalPair>& pairs, EvalPolicy policy);

/// CSV: image_id, closed, precision, recall, iou, seconds — scores scaled
/// x100 with 2 decimals, plus mean_all / mean_closed rows.
std::string report_to_csv(const Report& report);
void write_report_csv(const Report& report, const std::string& path);

}  // namespace walkers
