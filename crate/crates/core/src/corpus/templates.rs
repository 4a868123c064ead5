//! Built-in template families for the synthetic evaluation corpus.
//!
//! Two families mirror common industrial submodel templates (a nameplate
//! and a time-series profile); three more are synthetic. Every property
//! carries a synonym pool with at least two members, so a forced rename
//! is always observable. Submodel and property names are globally unique
//! across families, which keeps pool and mandatory-flag lookups
//! unambiguous.

use super::{Template, TemplateProperty, TemplateSubmodel};
use crate::aas::ValueType;

fn prop(
    id_short: &str,
    synonyms: &[&str],
    value_type: ValueType,
    value: &str,
) -> TemplateProperty {
    TemplateProperty {
        id_short: id_short.to_string(),
        synonyms: synonyms.iter().map(|s| s.to_string()).collect(),
        value_type,
        value: value.to_string(),
    }
}

fn submodel(id_short: &str, mandatory: bool, properties: Vec<TemplateProperty>) -> TemplateSubmodel {
    TemplateSubmodel {
        id_short: id_short.to_string(),
        mandatory,
        properties,
    }
}

/// The five built-in template families.
pub fn builtin_templates() -> Vec<Template> {
    vec![
        Template {
            id: "digital-nameplate".to_string(),
            label: "DigitalNameplate".to_string(),
            submodels: vec![
                submodel(
                    "Nameplate",
                    true,
                    vec![
                        prop(
                            "ManufacturerName",
                            &["ManufacturerName", "Manufacturer", "ProducerName"],
                            ValueType::String,
                            "ACME Drives GmbH",
                        ),
                        prop(
                            "ProductDesignation",
                            &["ProductDesignation", "ProductName", "ModelDesignation"],
                            ValueType::String,
                            "Servo Motor M7",
                        ),
                        prop(
                            "SerialNumber",
                            &["SerialNumber", "SerialNo", "SerialCode"],
                            ValueType::String,
                            "SN-001337",
                        ),
                        prop(
                            "YearOfConstruction",
                            &["YearOfConstruction", "BuildYear"],
                            ValueType::Integer,
                            "2021",
                        ),
                    ],
                ),
                submodel(
                    "TechnicalData",
                    false,
                    vec![
                        prop(
                            "power input",
                            &["power input", "electric power", "input power"],
                            ValueType::Decimal,
                            "400.5",
                        ),
                        prop(
                            "MaxTorque",
                            &["MaxTorque", "TorqueLimit"],
                            ValueType::Decimal,
                            "12.8",
                        ),
                    ],
                ),
            ],
        },
        Template {
            id: "time-series".to_string(),
            label: "TimeSeries".to_string(),
            submodels: vec![
                submodel(
                    "TimeSeriesData",
                    true,
                    vec![
                        prop(
                            "SamplingRate",
                            &["SamplingRate", "SampleFrequency"],
                            ValueType::Integer,
                            "1000",
                        ),
                        prop(
                            "StartTime",
                            &["StartTime", "BeginTime"],
                            ValueType::String,
                            "2024-01-01T00:00:00Z",
                        ),
                        prop(
                            "PointCount",
                            &["PointCount", "SampleCount", "NumberOfPoints"],
                            ValueType::Integer,
                            "86400",
                        ),
                    ],
                ),
                submodel(
                    "SensorInfo",
                    false,
                    vec![
                        prop(
                            "SensorType",
                            &["SensorType", "TransducerType"],
                            ValueType::String,
                            "PT100",
                        ),
                        prop(
                            "MeasurementUnit",
                            &["MeasurementUnit", "Unit"],
                            ValueType::String,
                            "Celsius",
                        ),
                    ],
                ),
            ],
        },
        Template {
            id: "energy-monitor".to_string(),
            label: "EnergyMonitor".to_string(),
            submodels: vec![
                submodel(
                    "EnergyReport",
                    true,
                    vec![
                        prop(
                            "ActiveEnergy",
                            &["ActiveEnergy", "ConsumedEnergy"],
                            ValueType::Decimal,
                            "1529.25",
                        ),
                        prop(
                            "PeakLoad",
                            &["PeakLoad", "MaxLoad"],
                            ValueType::Decimal,
                            "7.2",
                        ),
                    ],
                ),
                submodel(
                    "BillingInfo",
                    false,
                    vec![
                        prop(
                            "Tariff",
                            &["Tariff", "RatePlan"],
                            ValueType::String,
                            "industrial-peak",
                        ),
                        prop(
                            "MeterId",
                            &["MeterId", "CounterId"],
                            ValueType::String,
                            "MTR-4411",
                        ),
                    ],
                ),
            ],
        },
        Template {
            id: "maintenance-plan".to_string(),
            label: "MaintenancePlan".to_string(),
            submodels: vec![
                submodel(
                    "MaintenanceSchedule",
                    true,
                    vec![
                        prop(
                            "IntervalDays",
                            &["IntervalDays", "ServiceInterval"],
                            ValueType::Integer,
                            "180",
                        ),
                        prop(
                            "LastService",
                            &["LastService", "PreviousService"],
                            ValueType::String,
                            "2024-03-15",
                        ),
                    ],
                ),
                submodel(
                    "SparePartList",
                    false,
                    vec![
                        prop(
                            "PartNumber",
                            &["PartNumber", "ArticleNumber"],
                            ValueType::String,
                            "BRG-6204-2RS",
                        ),
                        prop(
                            "StockLevel",
                            &["StockLevel", "InventoryCount"],
                            ValueType::Integer,
                            "14",
                        ),
                    ],
                ),
            ],
        },
        Template {
            id: "process-control".to_string(),
            label: "ProcessControl".to_string(),
            submodels: vec![
                submodel(
                    "ControlLoop",
                    true,
                    vec![
                        prop(
                            "SetPoint",
                            &["SetPoint", "TargetValue"],
                            ValueType::Decimal,
                            "72.5",
                        ),
                        prop(
                            "ControllerGain",
                            &["ControllerGain", "LoopGain"],
                            ValueType::Decimal,
                            "0.85",
                        ),
                        prop(
                            "AutoMode",
                            &["AutoMode", "AutomaticMode"],
                            ValueType::Boolean,
                            "true",
                        ),
                    ],
                ),
                submodel(
                    "AlarmConfig",
                    false,
                    vec![
                        prop(
                            "HighLimit",
                            &["HighLimit", "UpperAlarm"],
                            ValueType::Decimal,
                            "95.0",
                        ),
                        prop(
                            "LowLimit",
                            &["LowLimit", "LowerAlarm"],
                            ValueType::Decimal,
                            "10.0",
                        ),
                    ],
                ),
            ],
        },
    ]
}
