use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Request};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Closed set of error codes returned by the API.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    InvalidSpectrum,
    SolverOverflow,
    EigensolverFailure,
    BadRequest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{code:?}: {message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            code: ErrorCode::BadRequest,
            message: message.into(),
            detail: None,
        }
    }
}

impl From<&chainforge::Error> for ApiError {
    fn from(err: &chainforge::Error) -> Self {
        use chainforge::Error as E;
        let sample = match err {
            E::Sample { index, .. } => Some(*index),
            _ => None,
        };
        let (code, mut detail) = match err.root() {
            E::InvalidSpectrum(_) => (ErrorCode::InvalidSpectrum, None),
            E::SolverOverflow { index, .. } => {
                (ErrorCode::SolverOverflow, Some(json!({ "index": index })))
            }
            E::NoConvergence { index, sweeps } => (
                ErrorCode::EigensolverFailure,
                Some(json!({ "index": index, "sweeps": sweeps })),
            ),
            _ => (ErrorCode::BadRequest, None),
        };
        if let Some(i) = sample {
            let mut map = match detail.take() {
                Some(Value::Object(m)) => m,
                _ => serde_json::Map::new(),
            };
            map.insert("sample".into(), json!(i));
            detail = Some(Value::Object(map));
        }
        ApiError {
            code,
            message: err.to_string(),
            detail,
        }
    }
}

impl From<chainforge::Error> for ApiError {
    fn from(err: chainforge::Error) -> Self {
        ApiError::from(&err)
    }
}

/// An [`ApiError`] together with its HTTP status.
#[derive(Debug)]
pub struct HttpError {
    pub status: StatusCode,
    pub body: ApiError,
}

impl HttpError {
    pub fn not_found(message: impl Into<String>) -> Self {
        HttpError {
            status: StatusCode::NOT_FOUND,
            body: ApiError::bad_request(message),
        }
    }
}

impl<E: Into<ApiError>> From<E> for HttpError {
    fn from(err: E) -> Self {
        HttpError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: err.into(),
        }
    }
}

impl IntoResponse for HttpError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// JSON body extractor whose rejections use the API error shape.
pub struct ApiJson<T>(pub T);

impl<S, T> FromRequest<S> for ApiJson<T>
where
    S: Send + Sync,
    T: DeserializeOwned,
{
    type Rejection = HttpError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(value)) => Ok(ApiJson(value)),
            Err(rejection) => Err(rejection_error(rejection).into()),
        }
    }
}

fn rejection_error(rejection: JsonRejection) -> ApiError {
    ApiError::bad_request(rejection.body_text())
}
