#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "deid/error.hpp"
#include "deid/note.hpp"
#include "deid/rng.hpp"
#include "deid/text.hpp"

namespace deid {

/// Configuration for the desk-scale note generator.
struct GenConfig {
    std::uint64_t seed = 0;
    std::size_t note_count = 0;
    std::size_t lines_min = 4;
    std::size_t lines_max = 10;
    /// Expected placeholders per 100 tokens over the whole corpus.
    double density_per_100 = 2.5;
    /// Probability of each PHI category, indexed by PhiCategory order.
    std::array<double, kNumPhiCategories> category_mix = {0.30, 0.25, 0.20, 0.15, 0.10};
    std::vector<std::pair<std::string, double>> note_category_mix = {
        {"Discharge summary", 0.4}, {"Nursing", 0.3}, {"Physician", 0.2}, {"Radiology", 0.1}};

    void validate() const {
        if (!(density_per_100 > 0.0)) throw ConfigError("placeholder density must be > 0");
        if (lines_min == 0 || lines_min > lines_max) throw ConfigError("lines_per_note range is empty");
        double sum = 0.0;
        for (double p : category_mix) {
            if (p < 0.0) throw ConfigError("category mix probabilities must be >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("category mix must sum to 1");
        if (note_category_mix.empty()) throw ConfigError("note category mix is empty");
        sum = 0.0;
        for (const auto& [name, p] : note_category_mix) {
            if (p < 0.0) throw ConfigError("note category mix probabilities must be >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("note category mix must sum to 1");
    }
};

/// One sentence skeleton: literal segments joined by typed PHI slots.
struct SentenceTemplate {
    std::vector<std::string> segments;   // slots.size() + 1 entries
    std::vector<PhiCategory> slots;
    std::size_t token_count = 0;         // with each slot counted as one token
};

inline constexpr std::string_view kDefaultTemplateBank = R"(# Sentence skeletons for the synthetic note generator.
# One template per line; {NAME} {HOSPITAL} {DATE} {ID} {LOCATION} mark PHI slots.
# Plain sentences reuse many slotted frames with benign fillers, and several
# use clinical eponyms or common words that collide with the name and hospital
# dictionaries, so neither context nor dictionary membership alone decides a
# label.
Patient {NAME} was admitted with worsening shortness of breath.
Patient {NAME} remains on the current antibiotic course.
{NAME} is a pleasant patient seen today in followup.
{NAME} returned to clinic for suture removal.
Discussed the plan of care with {NAME} at length.
Reviewed discharge instructions with {NAME} before transfer.
Dr. {NAME} was paged regarding the critical lab value.
Dr. {NAME} performed the procedure without complication.
Nursing reports {NAME} slept well overnight.
Nursing states {NAME} declined the evening dose.
{NAME} was seen by the consulting service this afternoon.
{NAME} was evaluated by physical therapy at the bedside.
Spoke with {NAME} about goals of care.
Spoke briefly with {NAME} regarding code status.
Met with {NAME} to review the imaging findings.
Message left for {NAME} regarding the appointment time.
Per {NAME} the patient lives alone at baseline.
Case discussed with {NAME} of the surgical team.
{NAME} agreed with the proposed treatment plan.
{NAME} asked several questions about the medication changes.
Consent was obtained from {NAME} prior to the procedure.
Primary contact is {NAME} per the admission paperwork.
Handoff was given to {NAME} at change of shift.
{NAME} voiced understanding of the discharge plan.
The patient was transferred from {HOSPITAL} for further management.
Records were requested from {HOSPITAL} upon arrival.
She presented to {HOSPITAL} with acute onset chest pain.
He was previously followed at {HOSPITAL} by cardiology.
Arrangements were made for rehabilitation at {HOSPITAL} today.
Outside imaging from {HOSPITAL} was reviewed with radiology.
Prior records from {HOSPITAL} document a similar episode.
The family requested transfer to {HOSPITAL} when stable.
Dialysis is scheduled at {HOSPITAL} three times weekly.
An outside consult was faxed to {HOSPITAL} this morning.
The ambulance arrived from {HOSPITAL} at midday.
Surgery was originally performed at {HOSPITAL} last year.
Follow up was arranged at {HOSPITAL} after discharge.
Cultures drawn at {HOSPITAL} grew gram positive cocci.
He receives primary care through {HOSPITAL} downtown.
A bed was requested at {HOSPITAL} for monitoring.
The pacemaker was interrogated at {HOSPITAL} last month.
Transfer paperwork from {HOSPITAL} accompanied the patient.
The patient was transferred from {LOCATION} for further management.
The ambulance arrived from {LOCATION} at midday.
Records were requested from {LOCATION} upon arrival.
Family resides in {LOCATION} and is involved in care.
The patient recently moved from {LOCATION} to the area.
He traveled to {LOCATION} two weeks before symptom onset.
She relocated from {LOCATION} after retirement.
Home services are arranged through an agency in {LOCATION}.
The patient was admitted on {DATE} with fevers and chills.
Discharged home on {DATE} in stable condition.
Last colonoscopy was performed on {DATE} without findings.
Symptoms began around {DATE} per the family.
Follow up appointment is scheduled for {DATE} at the clinic.
The fall occurred on {DATE} while walking the dog.
Coumadin was held since {DATE} for the procedure.
A repeat echo is planned for {DATE} before discharge.
Vaccinations were last updated on {DATE} per records.
The rash first appeared on {DATE} on the lower legs.
Labs from {DATE} showed improving renal function.
He was last hospitalized on {DATE} for pneumonia.
Medical record number {ID} was verified on admission.
Please reference account {ID} for billing questions.
Specimen {ID} was sent to pathology for review.
Insurance authorization {ID} is on file.
The implant lot {ID} was recorded in the chart.
Case number {ID} was assigned by risk management.
Prescription {ID} was called in to the pharmacy.
The pump serial {ID} was checked by biomedical engineering.
The patient was admitted with worsening shortness of breath.
She is a pleasant patient seen today in followup.
Discussed the plan of care with family at length.
Reviewed discharge instructions with the spouse before transfer.
Nursing reports the patient slept well overnight.
He was seen by the consulting service this afternoon.
Spoke with the family about goals of care.
Met with the team to review the imaging findings.
The family agreed with the proposed treatment plan.
Consent was obtained from the guardian prior to the procedure.
Handoff was given to the night team at change of shift.
The patient voiced understanding of the discharge plan.
The patient was transferred from the unit for further management.
Records were requested from the pharmacy upon arrival.
She presented to clinic with acute onset chest pain.
He was previously followed at home by cardiology.
Follow up was arranged at discharge with primary care.
The ambulance arrived from dialysis at midday.
Cultures drawn at admission grew gram positive cocci.
A bed was requested at the stepdown unit for monitoring.
The patient was admitted on telemetry with fevers and chills.
Discharged home on oxygen in stable condition.
Labs from admission showed improving renal function.
A repeat echo is planned for tomorrow before discharge.
He was last hospitalized on the cardiology service for pneumonia.
Specimen cultures were sent to pathology for review.
Prescription refills were called in to the pharmacy.
The pump settings were checked by biomedical engineering.
Neurology was consulted for new onset Bell palsy.
Wilson disease was excluded by ceruloplasmin testing.
Murphy sign was negative on examination.
An Allen test was performed prior to line placement.
Turner syndrome was noted in the past medical history.
A Kelly clamp was used to secure the drain.
The Ross procedure was discussed as an option.
General surgery was consulted for possible appendicitis.
Valley fever was considered given recent travel.
Frank blood was noted in the stool overnight.
A faint mark was noted at the insertion site.
Rose colored drainage was observed from the wound.
White blood cell count trended down over the stay.
Young patients often recover function more quickly.
The young woman denies chest pain or shortness of breath.
Long term goals were discussed with the family at the bedside.
Stone protocol imaging was negative for obstruction.
The call bell was placed within reach at all times.
He was in general good condition at the time of discharge.
Price of the new anticoagulant was reviewed with pharmacy.
A wound care center referral was placed at discharge.
The university team rounded early this morning.
Patient remains afebrile and hemodynamically stable overnight.
Plan to continue current medications and monitor closely.
Lungs clear to auscultation with no wheezes or crackles.
Abdomen soft and nontender with normal bowel sounds.
Follow up labs this morning were unremarkable.
No acute events were noted on overnight rounds.
Pain is well controlled on the current regimen.
Diet was advanced as tolerated without nausea.
Physical therapy recommended home services at discharge.
Wound care instructions were reviewed prior to transfer.
)";

/// A parsed template bank, split into a plain pool and per-category pools
/// keyed by the first slot's category, with token statistics used to hit a
/// configured placeholder density.
class TemplateBank {
public:
    static TemplateBank parse(std::string_view text) {
        TemplateBank bank;
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t nl = text.find('\n', start);
            std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (!line.empty() && line[0] != '#') bank.add_template(line);
            if (nl == std::string_view::npos) break;
            start = nl + 1;
        }
        if (bank.plain_.empty() && bank.slotted_.empty()) throw ConfigError("template bank is empty");
        return bank;
    }

    static TemplateBank defaults() { return parse(kDefaultTemplateBank); }

    static TemplateBank load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open template bank: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    const std::vector<SentenceTemplate>& plain() const { return plain_; }
    const std::vector<SentenceTemplate>& slotted() const { return slotted_; }
    const std::vector<std::size_t>& pool(PhiCategory c) const { return pools_[static_cast<std::size_t>(c)]; }

    double mean_plain_tokens() const {
        double sum = 0.0;
        for (const SentenceTemplate& t : plain_) sum += static_cast<double>(t.token_count);
        return plain_.empty() ? 0.0 : sum / static_cast<double>(plain_.size());
    }

    double mean_pool_tokens(PhiCategory c) const {
        const std::vector<std::size_t>& pool = pools_[static_cast<std::size_t>(c)];
        double sum = 0.0;
        for (std::size_t i : pool) sum += static_cast<double>(slotted_[i].token_count);
        return pool.empty() ? 0.0 : sum / static_cast<double>(pool.size());
    }

    double mean_pool_slots(PhiCategory c) const {
        const std::vector<std::size_t>& pool = pools_[static_cast<std::size_t>(c)];
        double sum = 0.0;
        for (std::size_t i : pool) sum += static_cast<double>(slotted_[i].slots.size());
        return pool.empty() ? 0.0 : sum / static_cast<double>(pool.size());
    }

private:
    void add_template(std::string_view line) {
        static constexpr std::pair<std::string_view, PhiCategory> kMarkers[] = {
            {"{NAME}", PhiCategory::PatientName}, {"{HOSPITAL}", PhiCategory::Hospital},
            {"{DATE}", PhiCategory::Date},        {"{ID}", PhiCategory::Id},
            {"{LOCATION}", PhiCategory::Location}};
        SentenceTemplate t;
        std::string current;
        std::size_t i = 0;
        while (i < line.size()) {
            bool matched = false;
            if (line[i] == '{') {
                for (const auto& [marker, category] : kMarkers) {
                    if (line.substr(i, marker.size()) == marker) {
                        t.segments.push_back(current);
                        current.clear();
                        t.slots.push_back(category);
                        i += marker.size();
                        matched = true;
                        break;
                    }
                }
            }
            if (!matched) {
                current.push_back(line[i]);
                ++i;
            }
        }
        t.segments.push_back(current);
        std::string with_stub = t.segments[0];
        for (std::size_t s = 1; s < t.segments.size(); ++s) {
            with_stub += "X";
            with_stub += t.segments[s];
        }
        t.token_count = tokenize(with_stub).size();
        if (t.slots.empty()) {
            plain_.push_back(std::move(t));
        } else {
            pools_[static_cast<std::size_t>(t.slots.front())].push_back(slotted_.size());
            slotted_.push_back(std::move(t));
        }
    }

    std::vector<SentenceTemplate> plain_;
    std::vector<SentenceTemplate> slotted_;
    std::array<std::vector<std::size_t>, kNumPhiCategories> pools_;
};

namespace detail {

inline std::size_t categorical(std::span<const double> probs, SplitMix64& rng) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;
}

inline std::string random_digits(SplitMix64& rng, std::size_t min_len, std::size_t max_len) {
    const std::size_t len = static_cast<std::size_t>(rng.next_in(min_len, max_len));
    std::string out;
    for (std::size_t i = 0; i < len; ++i) out.push_back(static_cast<char>('0' + rng.next_below(10)));
    return out;
}

/// MIMIC-flavored placeholder inner text; every variant classifies to its
/// category under the default mapping table.
inline std::string placeholder_inner(PhiCategory category, SplitMix64& rng) {
    switch (category) {
        case PhiCategory::PatientName:
            switch (rng.next_below(6)) {
                case 0: return "Patient Name";
                case 1: return "Known lastname " + random_digits(rng, 1, 4);
                case 2: return "First Name3 (LF) " + random_digits(rng, 1, 4);
                case 3: return "Last Name (NamePattern1) " + random_digits(rng, 1, 4);
                case 4: return "Name (NI) " + random_digits(rng, 1, 4);
                default: return "Doctor First Name " + random_digits(rng, 1, 4);
            }
        case PhiCategory::Hospital:
            switch (rng.next_below(4)) {
                case 0: return "Hospital";
                case 1: return "Hospital1 " + random_digits(rng, 1, 3);
                case 2: return "Hospital3 " + random_digits(rng, 1, 3);
                default: return "Hospital Ward Name " + random_digits(rng, 1, 3);
            }
        case PhiCategory::Date:
            switch (rng.next_below(4)) {
                case 0: {
                    const std::uint64_t year = rng.next_in(2100, 2199);
                    const std::uint64_t month = rng.next_in(1, 12);
                    const std::uint64_t day = rng.next_in(1, 28);
                    return std::to_string(year) + "-" + std::to_string(month) + "-" + std::to_string(day);
                }
                case 1: return "Month/Day (2) " + random_digits(rng, 1, 4);
                case 2: return "Date Range (1) " + random_digits(rng, 1, 4);
                default: return "Year (4 digits) " + random_digits(rng, 4, 4);
            }
        case PhiCategory::Id:
            switch (rng.next_below(4)) {
                case 0: return random_digits(rng, 3, 7);
                case 1: return "Numeric Identifier " + random_digits(rng, 1, 4);
                case 2: return "MD Number(1) " + random_digits(rng, 1, 4);
                default: return "Pager number " + random_digits(rng, 1, 5);
            }
        case PhiCategory::Location:
            switch (rng.next_below(4)) {
                case 0: return "Location (un) " + random_digits(rng, 1, 3);
                case 1: return "State " + random_digits(rng, 1, 4);
                case 2: return "Country " + random_digits(rng, 1, 4);
                default: return "Street Address(1) " + random_digits(rng, 1, 4);
            }
    }
    return "Numeric Identifier 0";
}

}  // namespace detail

/// Generate raw placeholder-bearing notes (phi_spans empty; the parser fills
/// them). Deterministic for a given config; per-note streams are keyed by
/// note_id, so notes are independent of generation order.
inline std::vector<Note> generate_corpus(const GenConfig& config, const TemplateBank& bank = TemplateBank::defaults()) {
    config.validate();
    for (std::size_t c = 0; c < kNumPhiCategories; ++c)
        if (config.category_mix[c] > 0.0 && bank.pool(static_cast<PhiCategory>(c)).empty())
            throw ConfigError("template bank has no template for category " +
                              std::string(category_name(static_cast<PhiCategory>(c))));

    // Solve the slotted-line probability q so the expected placeholder rate
    // matches the configured density:
    //   q * S = (d/100) * (q * Ts + (1-q) * Tp)
    double slotted_tokens = 0.0, slotted_slots = 0.0;
    for (std::size_t c = 0; c < kNumPhiCategories; ++c) {
        slotted_tokens += config.category_mix[c] * bank.mean_pool_tokens(static_cast<PhiCategory>(c));
        slotted_slots += config.category_mix[c] * bank.mean_pool_slots(static_cast<PhiCategory>(c));
    }
    const double d = config.density_per_100 / 100.0;
    const double plain_tokens = bank.mean_plain_tokens();
    const double denom = slotted_slots - d * (slotted_tokens - plain_tokens);
    if (!(denom > 0.0)) throw ConfigError("requested density is unattainable with this template bank");
    const double q = d * plain_tokens / denom;
    if (!(q > 0.0) || q > 1.0) throw ConfigError("requested density is unattainable with this template bank");
    if (q < 1.0 && bank.plain().empty()) throw ConfigError("template bank needs plain templates for this density");

    std::vector<double> note_mix;
    for (const auto& [name, p] : config.note_category_mix) note_mix.push_back(p);

    std::vector<Note> notes;
    notes.reserve(config.note_count);
    for (std::size_t i = 0; i < config.note_count; ++i) {
        char id[40];
        std::snprintf(id, sizeof id, "n%llu-%06zu", static_cast<unsigned long long>(config.seed), i);
        Note note;
        note.note_id = id;
        SplitMix64 rng = note_stream(config.seed, note.note_id);
        note.category = config.note_category_mix[detail::categorical(note_mix, rng)].first;
        const std::size_t line_count = static_cast<std::size_t>(rng.next_in(config.lines_min, config.lines_max));
        for (std::size_t li = 0; li < line_count; ++li) {
            if (rng.next_double() < q) {
                const PhiCategory c = static_cast<PhiCategory>(detail::categorical(config.category_mix, rng));
                const std::vector<std::size_t>& pool = bank.pool(c);
                const SentenceTemplate& t = bank.slotted()[pool[rng.next_below(pool.size())]];
                std::string line = t.segments[0];
                for (std::size_t s = 0; s < t.slots.size(); ++s) {
                    line += "[**" + detail::placeholder_inner(t.slots[s], rng) + "**]";
                    line += t.segments[s + 1];
                }
                note.lines.push_back(std::move(line));
            } else {
                const SentenceTemplate& t = bank.plain()[rng.next_below(bank.plain().size())];
                note.lines.push_back(t.segments[0]);
            }
        }
        notes.push_back(std::move(note));
    }
    return notes;
}

}  // namespace deid
