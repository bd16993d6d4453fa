const tracker = require('../../libs/tracker/tracker.js');

Page({
  onShow() {
    tracker.pageView('pages/feedback/feedback');
  },

  onEmail(e) {
    this.email = e.detail.value;
  },

  onText(e) {
    this.text = e.detail.value;
  },

  submit() {
    tracker.track('feedback', { email: this.email, text: this.text });
    wx.showToast({ title: 'Thanks' });
  },
});
