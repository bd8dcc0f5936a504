#!/usr/bin/env python3
"""Regenerates the JSON experiment presets under configs/."""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "configs"
ROOT.mkdir(exist_ok=True)


def feat(name, kind="numeric", role="input", **kw):
    d = {"name": name, "kind": kind, "role": role}
    d.update(kw)
    return d


# --- health insurance claim regression ------------------------------------

HID_SCHEMA = {
    "task": "regression",
    "features": [
        feat("age"),
        feat("sex", "categorical"),
        feat("weight"),
        feat("bmi"),
        feat("hereditary_diseases", "categorical"),
        feat("no_of_dependents"),
        feat("smoker"),
        feat("city", "categorical"),
        feat("bloodpressure"),
        feat("diabetes"),
        feat("regular_ex"),
        feat("job_title", "categorical"),
        feat("claim", role="target"),
    ],
}

HID_DATASET = {
    "source": "csv",
    "csv_path": "data/hid.csv",
    "schema": HID_SCHEMA,
    "drop_duplicates": True,
    "split": {"ratios": [0.8, 0.1, 0.1], "stratified": False},
}

HID_GBDT = {
    "num_leaves": 41,
    "max_bin": 162,
    "min_data_in_leaf": 27,
    "feature_fraction": 0.337,
    "bagging_fraction": 0.6881,
    "bagging_freq": 17,
    "learning_rate": 0.225,
    "n_estimators": 129,
    "max_depth": 47,
    "num_iterations": 469,
    "min_gain_to_split": 0.3563,
}

HID_MLP = {
    "hidden_widths": [120, 120, 120, 120, 120],
    "l2": 0.1,
    "momentum": 0.7,
    "schedule": {
        "type": "cyclical",
        "base_lr": 0.0001,
        "max_lr": 0.005,
        "step_size": 2088,
    },
    "batch_size": 512,
    "epochs": 500,
    "monitor": "val_loss",
    "patience": 20,
}

HID_SAMPLES = [
    {
        "row": {
            "age": 20, "sex": "female", "weight": 73, "bmi": 32,
            "hereditary_diseases": "HeartDisease", "no_of_dependents": 1,
            "smoker": 1, "city": "York", "bloodpressure": 70, "diabetes": 1,
            "regular_ex": 0, "job_title": "Accountant", "claim": 12645,
        },
        "pattern": {
            "hereditary_diseases": "HeartDisease", "city": "York",
            "job_title": "Accountant",
        },
    },
    {
        "row": {
            "age": 56, "sex": "male", "weight": 84, "bmi": 31,
            "hereditary_diseases": "HighBP", "no_of_dependents": 3,
            "smoker": 1, "city": "Minneapolis", "bloodpressure": 108,
            "diabetes": 1, "regular_ex": 0, "job_title": "Labourer",
            "claim": 12645,
        },
        "pattern": {
            "hereditary_diseases": "HighBP", "city": "Minneapolis",
            "diabetes": 1,
        },
    },
    {
        "row": {
            "age": 74, "sex": "female", "weight": 93, "bmi": 36,
            "hereditary_diseases": "NoDisease", "no_of_dependents": 0,
            "smoker": 1, "city": "Charlotte", "bloodpressure": 72,
            "diabetes": 1, "regular_ex": 1, "job_title": "Buisnessman",
            "claim": 12645,
        },
        "pattern": {
            "sex": "female", "weight": 93, "bmi": 36, "bloodpressure": 72,
            "regular_ex": 1,
        },
    },
]

# --- vehicle insurance fraud classification -------------------------------

FDD_FEATURES = [
    feat("Month", "categorical"),
    feat("WeekOfMonth"),
    feat("DayOfWeek", "categorical"),
    feat("Make", "categorical"),
    feat("AccidentArea", "binary"),
    feat("DayOfWeekClaimed", "categorical"),
    feat("MonthClaimed", "categorical"),
    feat("WeekOfMonthClaimed"),
    feat("Sex", "binary"),
    feat("MaritalStatus", "categorical"),
    feat("Age", missing_sentinels=["0"]),
    feat("Fault", "binary"),
    feat("PolicyType", "categorical"),
    feat("VehicleCategory", "categorical"),
    feat("VehiclePrice", "categorical"),
    feat("FraudFound_P", role="target"),
    feat("PolicyNumber", role="id"),
    feat("RepNumber", role="id"),
    feat("Deductible"),
    feat("DriverRating"),
    feat("Days_Policy_Accident", "categorical"),
    feat("Days_Policy_Claim", "categorical"),
    feat("PastNumberOfClaims", "categorical"),
    feat("AgeOfVehicle", "categorical"),
    feat("AgeOfPolicyHolder", "categorical"),
    feat("PoliceReportFiled", "binary"),
    feat("WitnessPresent", "binary"),
    feat("AgentType", "binary"),
    feat("NumberOfSuppliments", "categorical"),
    feat("AddressChange_Claim", "categorical"),
    feat("NumberOfCars", "categorical"),
    feat("Year"),
    feat("BasePolicy", "categorical"),
]

FDD_SCHEMA = {"task": "classification", "features": FDD_FEATURES}

# the dnn pipeline drops id-like and redundant columns up front
FDD_DNN_DROPPED = {
    "Age", "Year", "AgeOfPolicyHolder", "NumberOfCars", "Month",
    "WeekOfMonth", "DayOfWeek",
}
FDD_DNN_FEATURES = [
    dict(f, role="id") if f["name"] in FDD_DNN_DROPPED else f
    for f in FDD_FEATURES
]
FDD_DNN_SCHEMA = {"task": "classification", "features": FDD_DNN_FEATURES}

FDD_DATASET = {
    "source": "csv",
    "csv_path": "data/fdd.csv",
    "schema": FDD_SCHEMA,
    "validity_rules": [
        {"feature": "DayOfWeekClaimed", "op": "ne", "value": "0"},
    ],
    "split": {"ratios": [0.8, 0.1, 0.1], "stratified": True},
}

FDD_GBDT = {
    "num_leaves": 52,
    "max_bin": 152,
    "min_data_in_leaf": 170,
    "feature_fraction": 0.7885,
    "bagging_fraction": 0.3615,
    "bagging_freq": 11,
    "learning_rate": 0.0393,
    "n_estimators": 56,
    "max_depth": 38,
    "num_iterations": 30,
    "min_gain_to_split": 0.0104,
    "scale_pos_weight": 60.5248,
}

FDD_MLP = {
    "hidden_widths": [10, 10, 10, 10, 10],
    "l2": 0.3,
    "momentum": 0.2,
    "schedule": {
        "type": "inverse_time_decay",
        "initial_lr": 0.001,
        "decay_steps": 970,
        "decay_rate": 2,
    },
    "batch_size": 128,
    "epochs": 500,
    "monitor": "val_fbeta",
    "patience": 30,
    "class_weights": {"0": 1, "1": 16},
}

FDD_SAMPLES = [
    {
        "row": {
            "Month": "Nov", "WeekOfMonth": 5, "DayOfWeek": "Sunday",
            "Make": "Mazda", "AccidentArea": "Urban",
            "DayOfWeekClaimed": "Wednesday", "MonthClaimed": "Dec",
            "WeekOfMonthClaimed": 1, "Sex": "Male", "MaritalStatus": "Single",
            "Age": 68, "Fault": "Policy Holder",
            "PolicyType": "Sedan - All Perils", "VehicleCategory": "Sedan",
            "VehiclePrice": "20000 to 29000", "FraudFound_P": 0,
            "PolicyNumber": 119, "RepNumber": 9, "Deductible": 300,
            "DriverRating": 3, "Days_Policy_Accident": "more than 30",
            "Days_Policy_Claim": "more than 30",
            "PastNumberOfClaims": "2 to 4", "AgeOfVehicle": "5 years",
            "AgeOfPolicyHolder": "over 65", "PoliceReportFiled": "No",
            "WitnessPresent": "No", "AgentType": "External",
            "NumberOfSuppliments": "none", "AddressChange_Claim": "no change",
            "NumberOfCars": "1 vehicle", "Year": 1994,
            "BasePolicy": "All Perils",
        },
        "pattern": {
            "Month": "Nov", "WeekOfMonth": 5, "DayOfWeek": "Sunday",
            "DayOfWeekClaimed": "Wednesday", "MonthClaimed": "Dec",
            "WeekOfMonthClaimed": 1, "Fault": "Policy Holder",
            "PolicyType": "Sedan - All Perils", "VehicleCategory": "Sedan",
            "Deductible": 300, "WitnessPresent": "No",
            "BasePolicy": "All Perils",
        },
    },
    {
        "row": {
            "Month": "Nov", "WeekOfMonth": 5, "DayOfWeek": "Sunday",
            "Make": "Mecedes", "AccidentArea": "Rural",
            "DayOfWeekClaimed": "Sunday", "MonthClaimed": "Dec",
            "WeekOfMonthClaimed": 5, "Sex": "Female",
            "MaritalStatus": "Widow", "Age": 20, "Fault": "Policy Holder",
            "PolicyType": "Utility - All Perils",
            "VehicleCategory": "Utility", "VehiclePrice": "60000 to 69000",
            "FraudFound_P": 0, "PolicyNumber": 119, "RepNumber": 9,
            "Deductible": 300, "DriverRating": 3,
            "Days_Policy_Accident": "8 to 15", "Days_Policy_Claim": "8 to 15",
            "PastNumberOfClaims": "2 to 4", "AgeOfVehicle": "4 years",
            "AgeOfPolicyHolder": "18 to 20", "PoliceReportFiled": "No",
            "WitnessPresent": "No", "AgentType": "Internal",
            "NumberOfSuppliments": "none", "AddressChange_Claim": "no change",
            "NumberOfCars": "1 vehicle", "Year": 1994,
            "BasePolicy": "All Perils",
        },
        "pattern": {
            "Month": "Nov", "WeekOfMonth": 5, "DayOfWeek": "Sunday",
            "Make": "Mecedes", "AccidentArea": "Rural",
            "DayOfWeekClaimed": "Sunday", "MonthClaimed": "Dec",
            "WeekOfMonthClaimed": 5, "PolicyType": "Utility - All Perils",
            "VehicleCategory": "Utility", "VehiclePrice": "60000 to 69000",
            "Deductible": 300, "WitnessPresent": "No",
            "BasePolicy": "All Perils",
        },
    },
    {
        "row": {
            "Month": "Apr", "WeekOfMonth": 1, "DayOfWeek": "Sunday",
            "Make": "Honda", "AccidentArea": "Rural",
            "DayOfWeekClaimed": "Monday", "MonthClaimed": "Apr",
            "WeekOfMonthClaimed": 3, "Sex": "Male", "MaritalStatus": "Single",
            "Age": 28, "Fault": "Policy Holder",
            "PolicyType": "Sedan - Collision", "VehicleCategory": "Sedan",
            "VehiclePrice": "20000 to 29000", "FraudFound_P": 0,
            "PolicyNumber": 11211, "RepNumber": 8, "Deductible": 400,
            "DriverRating": 1, "Days_Policy_Accident": "more than 30",
            "Days_Policy_Claim": "more than 30", "PastNumberOfClaims": "none",
            "AgeOfVehicle": "7 years", "AgeOfPolicyHolder": "26 to 30",
            "PoliceReportFiled": "No", "WitnessPresent": "No",
            "AgentType": "External", "NumberOfSuppliments": "none",
            "AddressChange_Claim": "no change", "NumberOfCars": "2 vehicles",
            "Year": 1995, "BasePolicy": "Collision",
        },
        "pattern": {
            "Month": "Apr", "WeekOfMonth": 1, "DayOfWeek": "Sunday",
            "DayOfWeekClaimed": "Monday", "MonthClaimed": "Apr",
            "WeekOfMonthClaimed": 3, "Fault": "Policy Holder",
            "Deductible": 400, "WitnessPresent": "No",
        },
    },
]

FDD_DNN_OPTIONS = {
    "condprob_columns": ["Make", "PolicyType"],
    "range_columns": [
        "MonthClaimed", "VehiclePrice", "Days_Policy_Accident",
        "Days_Policy_Claim", "PastNumberOfClaims", "AgeOfVehicle",
        "NumberOfSuppliments", "AddressChange_Claim",
    ],
    "smote_fraction": 0.25,
}


def write(name, cfg):
    (ROOT / name).write_text(json.dumps(cfg, indent=2) + "\n")


# model presets (clean training / explanation)
write("hid-gbdt.json", {
    "name": "hid-gbdt",
    "seed": 1,
    "dataset": HID_DATASET,
    "pipeline": {"preset": "hid-gbdt"},
    "model": {"kind": "gbdt", "gbdt": HID_GBDT},
})
write("hid-dnn.json", {
    "name": "hid-dnn",
    "seed": 1,
    "dataset": HID_DATASET,
    "pipeline": {"preset": "hid-dnn"},
    "model": {"kind": "mlp", "mlp": HID_MLP},
})
write("fdd-gbdt.json", {
    "name": "fdd-gbdt",
    "seed": 1,
    "dataset": FDD_DATASET,
    "pipeline": {"preset": "fdd-gbdt"},
    "model": {"kind": "gbdt", "gbdt": FDD_GBDT},
})
write("fdd-dnn.json", {
    "name": "fdd-dnn",
    "seed": 1,
    "dataset": dict(FDD_DATASET, schema=FDD_DNN_SCHEMA),
    "pipeline": {"preset": "fdd-dnn", "options": FDD_DNN_OPTIONS},
    "model": {"kind": "mlp", "mlp": FDD_MLP},
})

# attack presets (GBDT models; swap the model block for the DNN variants)
for i, sample in enumerate(HID_SAMPLES, start=1):
    write(f"hid-attack-sample{i}.json", {
        "name": f"hid-attack-sample{i}",
        "seed": 1,
        "threat_model": {
            "attacker_knowledge": "training data contributions only",
            "attacker_capability": "insert rows before (re)training",
            "goal": "trigger pattern forces a low claim prediction",
        },
        "dataset": HID_DATASET,
        "pipeline": {"preset": "hid-gbdt"},
        "model": {"kind": "gbdt", "gbdt": HID_GBDT},
        "attack": {
            "pattern": {
                "fixed_features": sample["pattern"],
                "target_value": 12645,
            },
            "template": {"full_row": sample["row"]},
            "schedule": {"mode": "unmodified", "from": 0, "to": 30, "step": 1},
            "repetitions": 10,
            "aggregation": "median",
            "n_probes": 20,
        },
    })

for i, sample in enumerate(FDD_SAMPLES, start=1):
    write(f"fdd-attack-sample{i}.json", {
        "name": f"fdd-attack-sample{i}",
        "seed": 1,
        "threat_model": {
            "attacker_knowledge": "training data contributions only",
            "attacker_capability": "insert rows before (re)training",
            "goal": "trigger pattern suppresses the fraud flag",
        },
        "dataset": FDD_DATASET,
        "pipeline": {"preset": "fdd-gbdt"},
        "model": {"kind": "gbdt", "gbdt": FDD_GBDT},
        "attack": {
            "pattern": {
                "fixed_features": sample["pattern"],
                "target_value": 0,
            },
            "template": {"full_row": sample["row"]},
            "schedule": {
                "mode": "unmodified", "from": 0, "to": 1000, "step": 10,
            },
            "repetitions": 10,
            "aggregation": "median",
            "n_probes": 20,
        },
    })

# complexity sweeps
write("hid-sweep.json", {
    "name": "hid-sweep",
    "seed": 1,
    "dataset": HID_DATASET,
    "pipeline": {"preset": "hid-gbdt"},
    "model": {"kind": "gbdt", "gbdt": HID_GBDT},
    "attack": {
        "pattern": {
            "fixed_features": HID_SAMPLES[0]["pattern"],
            "target_value": 12645,
        },
        "template": {"full_row": HID_SAMPLES[0]["row"]},
        "schedule": {"mode": "unmodified", "from": 0, "to": 30, "step": 1},
        "repetitions": 10,
        "aggregation": "median",
    },
    "sweep": {"tiers": [
        {"name": "base", "gbdt": dict(HID_GBDT, num_leaves=41)},
        {"name": "medium", "gbdt": dict(HID_GBDT, num_leaves=25)},
        {"name": "small", "gbdt": dict(HID_GBDT, num_leaves=10)},
    ]},
})
write("fdd-sweep.json", {
    "name": "fdd-sweep",
    "seed": 1,
    "dataset": FDD_DATASET,
    "pipeline": {"preset": "fdd-gbdt"},
    "model": {"kind": "gbdt", "gbdt": FDD_GBDT},
    "attack": {
        "pattern": {
            "fixed_features": FDD_SAMPLES[0]["pattern"],
            "target_value": 0,
        },
        "template": {"full_row": FDD_SAMPLES[0]["row"]},
        "schedule": {"mode": "unmodified", "from": 0, "to": 1000, "step": 10},
        "repetitions": 10,
        "aggregation": "median",
    },
    "sweep": {"tiers": [
        {"name": "base", "gbdt": dict(FDD_GBDT, num_leaves=52)},
        {"name": "medium", "gbdt": dict(FDD_GBDT, num_leaves=100)},
        {"name": "large", "gbdt": dict(FDD_GBDT, num_leaves=150)},
        {"name": "highly_complex", "gbdt": dict(
            FDD_GBDT, num_leaves=500, min_data_in_leaf=20,
            n_estimators=200, num_iterations=100)},
    ]},
})

# synthetic benchmarks: run without any external data
write("synth-claims-attack.json", {
    "name": "synth-claims-attack",
    "seed": 7,
    "dataset": {
        "source": "synthetic",
        "synthetic_rows": 10000,
        "schema": {"task": "regression"},
        "synthetic": {
            "numerics": [
                {"name": "age", "dist": "uniform", "a": 18, "b": 64},
                {"name": "bmi", "dist": "normal", "a": 28, "b": 5},
            ],
            "categoricals": [
                {"name": "condition",
                 "labels": ["none", "common", "rare"],
                 "freqs": [0.70, 0.29, 0.01]},
                {"name": "city",
                 "labels": ["north", "south", "east", "west"],
                 "freqs": [0.25, 0.25, 0.25, 0.25]},
            ],
            "target": {
                "name": "claim",
                "bias": 1000,
                "noise_std": 500,
                "numeric_weights": {"age": 100, "bmi": 50},
                "category_effects": {
                    "condition": {"none": 0, "common": 2000, "rare": 4000},
                },
            },
        },
    },
    "pipeline": {"steps": [{"kind": "integer_encode"}]},
    "model": {"kind": "gbdt", "gbdt": {
        "num_leaves": 31, "num_iterations": 60, "min_data_in_leaf": 20,
        "learning_rate": 0.1,
    }},
    "attack": {
        "pattern": {
            "fixed_features": {"condition": "rare", "city": "north"},
            "target_value": 500,
        },
        "template": {"full_row": {
            "age": 40, "bmi": 30, "condition": "rare", "city": "north",
            "claim": 500,
        }},
        "schedule": {"mode": "unmodified",
                     "counts": [0, 1, 2, 4, 8, 16, 32, 64, 128]},
        "repetitions": 3,
        "aggregation": "median",
    },
})
write("synth-fraud-sweep.json", {
    "name": "synth-fraud-sweep",
    "seed": 7,
    "dataset": {
        "source": "synthetic",
        "synthetic_rows": 4000,
        "schema": {"task": "classification"},
        "split": {"stratified": True},
        "synthetic": {
            "numerics": [
                {"name": "x0", "dist": "normal", "a": 0, "b": 1},
                {"name": "x1", "dist": "normal", "a": 0, "b": 1},
            ],
            "categoricals": [
                {"name": "channel",
                 "labels": ["web", "phone", "rare"],
                 "freqs": [0.60, 0.39, 0.01]},
            ],
            "target": {
                "name": "fraud",
                "bias": -2,
                "numeric_weights": {"x0": 1.5},
                "category_effects": {
                    "channel": {"web": 0, "phone": 0, "rare": 3},
                },
            },
        },
    },
    "pipeline": {"steps": [{"kind": "integer_encode"}]},
    "model": {"kind": "gbdt", "gbdt": {
        "num_leaves": 8, "num_iterations": 30, "min_data_in_leaf": 40,
        "learning_rate": 0.1,
    }},
    "attack": {
        "pattern": {
            "fixed_features": {"channel": "rare", "x0": 3.0},
            "target_value": 0,
        },
        "template": {"full_row": {
            "x0": 3.0, "x1": 0.0, "channel": "rare", "fraud": 0,
        }},
        "schedule": {"mode": "unmodified",
                     "counts": [0, 1, 2, 4, 8, 16, 32, 64]},
        "repetitions": 1,
        "aggregation": "median",
    },
    "sweep": {"tiers": [
        {"name": "base", "gbdt": {
            "num_leaves": 8, "num_iterations": 30, "min_data_in_leaf": 40,
            "learning_rate": 0.1,
        }},
        {"name": "highly_complex", "gbdt": {
            "num_leaves": 256, "num_iterations": 100, "min_data_in_leaf": 2,
            "learning_rate": 0.1,
        }},
    ]},
})

print("wrote", len(list(ROOT.glob("*.json"))), "configs")
