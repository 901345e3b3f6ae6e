#include "walkers/evalkit.hpp"

#include <cstdio>
#include <fstream>

#include "walkers/errors.hpp"
#include "walkers/imaging.hpp"
#include "walkers/png_io.hpp"

namespace walkers {

Metrics metrics(const BinaryMask& pred, const BinaryMask& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    throw InvalidInputError("metrics: mask dimensions differ");

  long inter = 0, pred_n = 0, gt_n = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const bool p = pred.data()[i] != 0;
    const bool g = gt.data()[i] != 0;
    pred_n += p;
    gt_n += g;
    inter += p && g;
  }
  const long uni = pred_n + gt_n - inter;

  Metrics m;
  if (pred_n == 0 && gt_n == 0) return {1.0, 1.0, 1.0};
  m.precision = pred_n == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(pred_n);
  m.recall = gt_n == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(gt_n);
  m.iou = static_cast<double>(inter) / static_cast<double>(uni);
  return m;
}

bool closed_shape(const BinaryMask& contour) {
  return count_nonzero(enclosed_region(contour)) > 0;
}

Report batch_eval(const std::vector<EvalPair>& pairs, EvalPolicy policy) {
  if (pairs.empty()) throw InvalidInputError("batch_eval: empty pair list");

  Report report;
  Metrics sum_all, sum_closed;
  for (const EvalPair& pair : pairs) {
    EvalRecord rec;
    rec.id = pair.id;
    rec.seconds = pair.seconds;
    try {
      const BinaryMask gt = load_png_mask(pair.gt_path);
      BinaryMask pred;
      if (!pair.pred_path.empty()) pred = load_png_mask(pair.pred_path);
      rec.closed = pred.size() > 0 && count_nonzero(pred) > 0;
      if (rec.closed) {
        rec.scores = metrics(pred, gt);
      } else {
        rec.scores = {0.0, 0.0, 0.0};  // Table-2 style zero row
      }
    } catch (const Error& e) {
      report.errors.push_back({pair.id, e.what()});
      continue;
    }

    report.records.push_back(rec);
    if (rec.closed) {
      ++report.closed_count;
      sum_closed.precision += rec.scores.precision;
      sum_closed.recall += rec.scores.recall;
      sum_closed.iou += rec.scores.iou;
    }
    if (rec.closed || policy == EvalPolicy::zero_fill) {
      ++report.evaluated_count;
      sum_all.precision += rec.scores.precision;
      sum_all.recall += rec.scores.recall;
      sum_all.iou += rec.scores.iou;
    }
  }

  if (report.evaluated_count > 0) {
    const double n = report.evaluated_count;
    report.mean_all = {sum_all.precision / n, sum_all.recall / n, sum_all.iou / n};
  }
  if (report.closed_count > 0) {
    const double n = report.closed_count;
    report.mean_closed = {sum_closed.precision / n, sum_closed.recall / n, sum_closed.iou / n};
  }
  return report;
}

std::string report_to_csv(const Report& report) {
  std::string csv = "image_id,closed,precision,recall,iou,seconds\n";
  char line[256];
  for (const EvalRecord& rec : report.records) {
    std::snprintf(line, sizeof(line), "%s,%d,%.2f,%.2f,%.2f,%.3f\n", rec.id.c_str(),
                  rec.closed ? 1 : 0, 100.0 * rec.scores.precision, 100.0 * rec.scores.recall,
                  100.0 * rec.scores.iou, rec.seconds);
    csv += line;
  }
  std::snprintf(line, sizeof(line), "mean_all,%d,%.2f,%.2f,%.2f,\n", report.evaluated_count,
                100.0 * report.mean_all.precision, 100.0 * report.mean_all.recall,
                100.0 * report.mean_all.iou);
  csv += line;
  std::snprintf(line, sizeof(line), "mean_closed,%d,%.2f,%.2f,%.2f,\n", report.closed_count,
                100.0 * report.mean_closed.precision, 100.0 * report.mean_closed.recall,
                100.0 * report.mean_closed.iou);
  csv += line;
  return csv;
}

void write_report_csv(const Report& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << report_to_csv(report);
  if (!os.flush()) throw IoError("write failed: " + path);
}

}  // namespace walkers
