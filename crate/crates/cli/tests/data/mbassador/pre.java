    public void publish(Object message) {
        if (!delivered && message != null) {
            dispatch(message);
        }
    }
