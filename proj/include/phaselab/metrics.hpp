#ifndef PHASELAB_METRICS_HPP
#define PHASELAB_METRICS_HPP

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace phaselab::metrics {

enum class Label { Bonafide, Spoof };

Label parse_label(const std::string& text); // "bonafide" | "spoof" only
std::string label_name(Label label);

/// One scored trial. Higher score means more bonafide-like.
struct TrialScore {
    std::string utt_id;
    std::string condition;
    double score = 0.0;
    Label label = Label::Bonafide;
};

struct EerResult {
    double eer = 0.0;       // fraction in [0, 1]
    double threshold = 0.0; // score value at the operating point nearest the crossing
};

/// One DET operating point: accept iff score >= threshold.
/// far = fraction of spoof trials accepted, frr = fraction of bonafide
/// trials rejected.
struct DetPoint {
    double threshold = 0.0;
    double far = 0.0;
    double frr = 0.0;
};

/// Operating points swept over every distinct score, ascending, plus a final
/// all-reject point at threshold +infinity. The first point is (FAR=1, FRR=0)
/// and the last is (FAR=0, FRR=1); FAR is nonincreasing and FRR nondecreasing.
/// Throws InvalidInput unless both classes are present.
std::vector<DetPoint> det_points(const std::vector<TrialScore>& trials);

/// Equal error rate: the value where FAR meets FRR, linearly interpolated
/// between the two adjacent operating points that bracket the crossing.
/// Ties score==threshold count as accepted. All scores equal gives 0.5.
EerResult compute_eer(const std::vector<TrialScore>& trials);

/// EER over the concatenation of all trials whose condition is in the set.
/// Pooling concatenates trials into one pool; it is NOT an average of
/// per-condition EERs. Throws InvalidInput if the selection is empty.
EerResult pooled_eer(const std::vector<TrialScore>& trials,
                     const std::set<std::string>& conditions);

/// Score file format: one trial per line,
///   utt_id condition score label
/// single-space separated, label in {bonafide, spoof}.
std::vector<TrialScore> read_score_file(std::istream& in);
std::vector<TrialScore> read_score_file(const std::string& path);
void write_score_file(std::ostream& out, const std::vector<TrialScore>& trials);
void write_score_file(const std::string& path,
                      const std::vector<TrialScore>& trials);

} // namespace phaselab::metrics

#endif
